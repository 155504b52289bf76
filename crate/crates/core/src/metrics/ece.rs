//! Expected calibration error with variance-minimizing bins.
//!
//! Samples are sorted by confidence and split into contiguous bins so that
//! the summed within-bin variance of the confidences is minimal. The optimal
//! partition is found by dynamic programming; each layer of the table is
//! filled by divide and conquer, which is valid because the optimal split
//! points of 1-D least-squares clustering are monotone.

use crate::error::{Error, Result};

/// One calibration bin over the sorted sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub accuracy: f64,
    pub confidence: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub ece: f64,
    pub bins: Vec<Bin>,
}

/// Prefix sums that give the within-segment sum of squared deviations in
/// constant time.
struct Sse {
    s0: Vec<f64>,
    s1: Vec<f64>,
    s2: Vec<f64>,
}

impl Sse {
    fn new(xs: &[f64], ws: &[f64]) -> Self {
        let mut s0 = vec![0.0; xs.len() + 1];
        let mut s1 = vec![0.0; xs.len() + 1];
        let mut s2 = vec![0.0; xs.len() + 1];
        for (i, (x, w)) in xs.iter().zip(ws).enumerate() {
            s0[i + 1] = s0[i] + w;
            s1[i + 1] = s1[i] + w * x;
            s2[i + 1] = s2[i] + w * x * x;
        }
        Sse { s0, s1, s2 }
    }

    /// Cost of the half-open segment `[a, b)`.
    fn cost(&self, a: usize, b: usize) -> f64 {
        let n = self.s0[b] - self.s0[a];
        let s = self.s1[b] - self.s1[a];
        (self.s2[b] - self.s2[a] - s * s / n).max(0.0)
    }
}

/// Splits sorted `xs` into `k` non-empty contiguous segments minimizing the
/// total within-segment sum of squares. Returns the segment end indices
/// (exclusive), the last being `xs.len()`.
pub fn variance_bins(xs: &[f64], k: usize) -> Vec<usize> {
    weighted_bins(xs, &vec![1.0; xs.len()], k)
}

/// As [`variance_bins`] with a positive weight per point.
pub fn weighted_bins(xs: &[f64], ws: &[f64], k: usize) -> Vec<usize> {
    let n = xs.len();
    let k = k.clamp(1, n.max(1));
    if n == 0 {
        return Vec::new();
    }
    let sse = Sse::new(xs, ws);
    // prev[i]: best cost of the first i points in j segments
    let mut prev: Vec<f64> = (0..=n)
        .map(|i| if i == 0 { 0.0 } else { sse.cost(0, i) })
        .collect();
    let mut splits: Vec<Vec<usize>> = vec![vec![0; n + 1]];
    for j in 2..=k {
        let mut cur = vec![f64::INFINITY; n + 1];
        let mut arg = vec![0usize; n + 1];
        fill(&sse, &prev, &mut cur, &mut arg, j, n, j - 1, n - 1);
        prev = cur;
        splits.push(arg);
    }
    let mut ends = vec![n];
    let mut end = n;
    for j in (1..k).rev() {
        end = splits[j][end];
        ends.push(end);
    }
    ends.reverse();
    ends
}

// Fills cur[lo..=hi] given that the optimal split for those indices lies in
// [opt_lo, opt_hi].
#[allow(clippy::too_many_arguments)]
fn fill(
    sse: &Sse,
    prev: &[f64],
    cur: &mut [f64],
    arg: &mut [usize],
    lo: usize,
    hi: usize,
    opt_lo: usize,
    opt_hi: usize,
) {
    if lo > hi {
        return;
    }
    let mid = (lo + hi) / 2;
    let mut best = (f64::INFINITY, opt_lo);
    for s in opt_lo..=opt_hi.min(mid - 1) {
        let c = prev[s] + sse.cost(s, mid);
        if c < best.0 {
            best = (c, s);
        }
    }
    cur[mid] = best.0;
    arg[mid] = best.1;
    if mid > lo {
        fill(sse, prev, cur, arg, lo, mid - 1, opt_lo, best.1);
    }
    fill(sse, prev, cur, arg, mid + 1, hi, best.1, opt_hi);
}

/// Total within-bin sum of squares for the given segment ends.
pub fn partition_cost(xs: &[f64], ends: &[usize]) -> f64 {
    let sse = Sse::new(xs, &vec![1.0; xs.len()]);
    let mut start = 0;
    let mut total = 0.0;
    for &e in ends {
        total += sse.cost(start, e);
        start = e;
    }
    total
}

/// ECE over `n_bins` variance-minimizing bins. With fewer distinct
/// confidences than bins the bin count drops to that number.
pub fn ece(confidences: &[f64], correct: &[bool], n_bins: usize) -> Result<Calibration> {
    if confidences.len() != correct.len() {
        return Err(Error::Shape(format!(
            "{} confidences but {} outcomes",
            confidences.len(),
            correct.len()
        )));
    }
    if let Some(&c) = confidences.iter().find(|c| !(0.0..=1.0).contains(*c)) {
        return Err(Error::domain("confidence", c));
    }
    let n = confidences.len();
    if n == 0 || n_bins == 0 {
        return Ok(Calibration {
            ece: 0.0,
            bins: Vec::new(),
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| confidences[a].total_cmp(&confidences[b]));
    // tied confidences always share a bin, so the partition runs over the
    // distinct values weighted by multiplicity; this also makes the result
    // independent of input order
    let mut values: Vec<f64> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    let mut hits: Vec<usize> = Vec::new();
    for &i in &order {
        if values.last() != Some(&confidences[i]) {
            values.push(confidences[i]);
            counts.push(0);
            hits.push(0);
        }
        *counts.last_mut().unwrap() += 1;
        *hits.last_mut().unwrap() += correct[i] as usize;
    }
    let weights: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let mut bins = Vec::new();
    let mut ece = 0.0;
    let mut start = 0;
    for end in weighted_bins(&values, &weights, n_bins) {
        let count: usize = counts[start..end].iter().sum();
        let conf = (start..end).map(|u| values[u] * weights[u]).sum::<f64>() / count as f64;
        let acc = hits[start..end].iter().sum::<usize>() as f64 / count as f64;
        ece += count as f64 / n as f64 * (acc - conf).abs();
        bins.push(Bin {
            lo: values[start],
            hi: values[end - 1],
            count,
            accuracy: acc,
            confidence: conf,
        });
        start = end;
    }
    Ok(Calibration { ece, bins })
}
