//! Area under the ROC curve from a rank statistic.

use crate::error::{Error, Result};

/// Probability that a positive outscores a negative, ties counting one half
/// (the Mann-Whitney U statistic over `|pos| * |neg|`).
pub fn auroc(positives: &[f64], negatives: &[f64]) -> Result<f64> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::Shape("AUROC needs both classes".into()));
    }
    if let Some(&s) = positives.iter().chain(negatives).find(|s| !s.is_finite()) {
        return Err(Error::domain("score", s));
    }
    let mut all: Vec<(f64, bool)> = positives
        .iter()
        .map(|&s| (s, true))
        .chain(negatives.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    // average ranks over tied runs, 1-based
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        let avg = (i + 1 + j) as f64 / 2.0;
        rank_sum += avg * all[i..j].iter().filter(|e| e.1).count() as f64;
        i = j;
    }
    let (np, nn) = (positives.len() as f64, negatives.len() as f64);
    Ok((rank_sum - np * (np + 1.0) / 2.0) / (np * nn))
}

/// ROC curve as `(false positive rate, true positive rate)` pairs, one per
/// distinct threshold, from `(0, 0)` to `(1, 1)`.
pub fn roc_points(positives: &[f64], negatives: &[f64]) -> Vec<(f64, f64)> {
    let mut thresholds: Vec<f64> = positives.iter().chain(negatives).copied().collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let rate =
        |set: &[f64], t: f64| set.iter().filter(|&&s| s >= t).count() as f64 / set.len() as f64;
    let mut pts = vec![(0.0, 0.0)];
    pts.extend(
        thresholds
            .iter()
            .map(|&t| (rate(negatives, t), rate(positives, t))),
    );
    pts
}

/// Shannon entropy in nats.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Separates in-distribution from out-of-distribution inputs by negative
/// predictive entropy; in-distribution counts as the positive class.
pub fn ood_auroc(in_dist: &[Vec<f64>], ood: &[Vec<f64>]) -> Result<f64> {
    let score = |ps: &[Vec<f64>]| ps.iter().map(|p| -entropy(p)).collect::<Vec<_>>();
    auroc(&score(in_dist), &score(ood))
}
