//! Evaluation metrics for classifiers and regressors.

mod auroc;
pub mod coverage;
mod ece;
mod report;

pub use auroc::{auroc, entropy, ood_auroc, roc_points};
pub use ece::{ece, partition_cost, variance_bins, weighted_bins, Bin, Calibration};
pub use report::Report;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::layers::{Network, Predictive};
use crate::normal::ln_normal_pdf;

/// Probabilities below this are clamped before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;

fn check(probs: &[Vec<f64>], labels: &[usize]) -> Result<()> {
    if probs.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} predictions but {} labels",
            probs.len(),
            labels.len()
        )));
    }
    for (p, &y) in probs.iter().zip(labels) {
        if y >= p.len() {
            return Err(Error::Shape(format!("label {y} with {} classes", p.len())));
        }
    }
    Ok(())
}

/// Mean negative log probability of the true label, and how many examples
/// hit the clamp.
pub fn nll(probs: &[Vec<f64>], labels: &[usize]) -> Result<(f64, usize)> {
    check(probs, labels)?;
    let mut clamped = 0;
    let total: f64 = probs
        .iter()
        .zip(labels)
        .map(|(p, &y)| {
            if p[y] < PROB_FLOOR {
                clamped += 1;
            }
            -p[y].max(PROB_FLOOR).ln()
        })
        .sum();
    Ok((total / probs.len() as f64, clamped))
}

/// Mean over examples of the squared distance to the one-hot label, summed
/// over classes.
pub fn brier(probs: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    check(probs, labels)?;
    let total: f64 = probs
        .iter()
        .zip(labels)
        .map(|(p, &y)| {
            p.iter()
                .enumerate()
                .map(|(k, &q)| (q - if k == y { 1.0 } else { 0.0 }).powi(2))
                .sum::<f64>()
        })
        .sum();
    Ok(total / probs.len() as f64)
}

/// Fraction of examples whose label is among the `k` most probable classes.
/// Ties at the cut are resolved toward lower class indices.
pub fn topk(probs: &[Vec<f64>], labels: &[usize], k: usize) -> Result<f64> {
    check(probs, labels)?;
    let hits = probs
        .iter()
        .zip(labels)
        .filter(|(p, &y)| {
            let above = p
                .iter()
                .enumerate()
                .filter(|&(i, &q)| q > p[y] || (q == p[y] && i < y))
                .count();
            above < k
        })
        .count();
    Ok(hits as f64 / probs.len() as f64)
}

pub fn accuracy(probs: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    topk(probs, labels, 1)
}

/// Index of the largest probability, lowest index on ties.
pub fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &q) in p.iter().enumerate() {
        if q > p[best] {
            best = i;
        }
    }
    best
}

/// Metrics reported for a classifier.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassReport {
    pub accuracy: f64,
    pub top5: f64,
    pub nll: f64,
    pub nll_clamped: usize,
    pub ece: f64,
    pub brier: f64,
    pub calibration: Vec<Bin>,
}

/// Bins used for ECE unless configured otherwise.
pub const ECE_BINS: usize = 20;

pub fn classification(probs: &[Vec<f64>], labels: &[usize], bins: usize) -> Result<ClassReport> {
    check(probs, labels)?;
    if probs.is_empty() {
        return Err(Error::Shape("no examples to evaluate".into()));
    }
    let (nll, nll_clamped) = nll(probs, labels)?;
    let conf: Vec<f64> = probs
        .iter()
        .map(|p| p.iter().copied().fold(0.0, f64::max).clamp(0.0, 1.0))
        .collect();
    let hit: Vec<bool> = probs
        .iter()
        .zip(labels)
        .map(|(p, &y)| argmax(p) == y)
        .collect();
    let cal = ece(&conf, &hit, bins)?;
    Ok(ClassReport {
        accuracy: accuracy(probs, labels)?,
        top5: topk(probs, labels, 5)?,
        nll,
        nll_clamped,
        ece: cal.ece,
        brier: brier(probs, labels)?,
        calibration: cal.bins,
    })
}

/// Root mean squared error.
pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(Error::Shape(format!(
            "{} predictions, {} targets",
            pred.len(),
            truth.len()
        )));
    }
    let se: f64 = pred.iter().zip(truth).map(|(a, b)| (a - b).powi(2)).sum();
    Ok((se / pred.len() as f64).sqrt())
}

/// Mean negative log density of `ys` under independent `N(mean, var)`.
pub fn gaussian_nll(means: &[f64], vars: &[f64], ys: &[f64]) -> Result<f64> {
    if means.len() != ys.len() || vars.len() != ys.len() || ys.is_empty() {
        return Err(Error::Shape("mismatched regression arrays".into()));
    }
    if let Some(&v) = vars.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::domain("variance", v));
    }
    let total: f64 = means
        .iter()
        .zip(vars)
        .zip(ys)
        .map(|((m, v), y)| -ln_normal_pdf(*y, *m, *v))
        .sum();
    Ok(total / ys.len() as f64)
}

/// Predictions of `net` for every input of `data`.
pub fn predict_all(net: &Network, data: &Dataset) -> Result<Vec<Predictive>> {
    data.inputs.iter().map(|x| net.predict(x)).collect()
}

/// Class probabilities, failing for regression heads.
pub fn class_probs(preds: &[Predictive]) -> Result<Vec<Vec<f64>>> {
    preds
        .iter()
        .map(|p| match p {
            Predictive::Classes(v) => Ok(v.clone()),
            Predictive::Regression { .. } => {
                Err(Error::Shape("expected a classification head".into()))
            }
        })
        .collect()
}

/// Everything `eval` reports about one labelled dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub report: Report,
    /// Calibration bins, empty for regression.
    pub calibration: Vec<Bin>,
    pub predictions: Vec<Predictive>,
}

/// Scores `net` on `data`. Classification reports accuracy, top-5, NLL, ECE
/// over `bins` bins and Brier; regression reports RMSE of the predictive
/// mean and the Gaussian NLL including observation noise.
pub fn evaluate(net: &Network, data: &Dataset, bins: usize) -> Result<Evaluation> {
    if data.is_empty() {
        return Err(Error::Shape("no examples to evaluate".into()));
    }
    let predictions = predict_all(net, data)?;
    let mut report = Report::new();
    report.int("examples", data.len() as u64);
    let calibration = match (data.labels(), data.values()) {
        (Some(labels), _) => {
            let probs = class_probs(&predictions)?;
            let c = classification(&probs, &labels, bins)?;
            report
                .num("accuracy", c.accuracy)
                .num("top5_accuracy", c.top5)
                .num("nll", c.nll)
                .int("nll_clamped", c.nll_clamped as u64)
                .num("ece", c.ece)
                .int("ece_bins", c.calibration.len() as u64)
                .num("brier", c.brier);
            c.calibration
        }
        (None, Some(ys)) => {
            let mut means = Vec::new();
            let mut vars = Vec::new();
            for p in &predictions {
                match p {
                    Predictive::Regression { mean, .. } => {
                        means.push(*mean);
                        vars.push(p.total_var().unwrap_or(f64::NAN));
                    }
                    Predictive::Classes(_) => {
                        return Err(Error::Shape("expected a regression head".into()))
                    }
                }
            }
            report
                .num("rmse", rmse(&means, &ys)?)
                .num("nll", gaussian_nll(&means, &vars, &ys)?)
                .num(
                    "mean_predictive_variance",
                    vars.iter().sum::<f64>() / vars.len() as f64,
                );
            Vec::new()
        }
        _ => {
            return Err(Error::Shape(
                "evaluation needs labels or regression targets".into(),
            ))
        }
    };
    Ok(Evaluation {
        report,
        calibration,
        predictions,
    })
}
