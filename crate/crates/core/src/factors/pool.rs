//! Max-pool factor over a window of scalar inputs.
//!
//! The forward message folds the window through Clark's moment-matched
//! maximum of two Gaussians. The backward message is routed whole to the
//! input with the largest mean; every other input receives `G(0, 0)`.

use crate::error::{Error, Result};
use crate::gaussian::Gaussian;
use crate::normal::{std_normal_cdf, std_normal_pdf};

/// Variance floor for the matched maximum.
pub const MAX_VAR_FLOOR: f64 = 1e-12;

/// Mean and variance of `max(X, Y)` for independent Gaussians (Clark 1961).
pub fn clark_max(m1: f64, v1: f64, m2: f64, v2: f64) -> (f64, f64) {
    let theta = (v1 + v2).sqrt();
    if !(theta > 0.0) {
        return if m1 >= m2 { (m1, v1) } else { (m2, v2) };
    }
    // translate so the second mean is zero
    let d = m1 - m2;
    let a = d / theta;
    let (p, q, pdf) = (std_normal_cdf(a), std_normal_cdf(-a), std_normal_pdf(a));
    let mean = d * p + theta * pdf;
    let second = (d * d + v1) * p + v2 * q + d * theta * pdf;
    (m2 + mean, (second - mean * mean).max(0.0))
}

/// Forward message and per-input backward messages for one pooling window.
pub fn maxpool_messages(
    window: &[Gaussian],
    downstream: Gaussian,
) -> Result<(Gaussian, Vec<Gaussian>)> {
    let first = window
        .first()
        .ok_or_else(|| Error::Shape("empty max-pool window".into()))?;
    let (mut m, mut v) = first.to_moments()?;
    let mut winner = 0;
    let mut best = m;
    for (i, g) in window.iter().enumerate().skip(1) {
        let (mi, vi) = g.to_moments()?;
        (m, v) = clark_max(m, v, mi, vi);
        if mi > best {
            best = mi;
            winner = i;
        }
    }
    let mut back = vec![Gaussian::UNIFORM; window.len()];
    back[winner] = downstream;
    Ok((Gaussian::from_moments(m, v.max(MAX_VAR_FLOOR))?, back))
}

/// Index of the window entry with the largest mean (first on ties).
pub fn winner(means: &[f64]) -> usize {
    let mut w = 0;
    for (i, &m) in means.iter().enumerate() {
        if m > means[w] {
            w = i;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use factorbnn_oracle::{normal_stream, Running};

    #[test]
    fn max_of_two_standard_normals() {
        let (m, v) = clark_max(0.0, 1.0, 0.0, 1.0);
        assert!((m - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-15);
        assert!((v - (1.0 - 1.0 / std::f64::consts::PI)).abs() < 1e-14);
    }

    #[test]
    fn deterministic_window() {
        let g = Gaussian::from_moments(2.5, 1e-30).unwrap();
        let (f, back) = maxpool_messages(&[g; 4], Gaussian::new(1.0, 2.0)).unwrap();
        let (m, v) = f.to_moments().unwrap();
        assert!((m - 2.5).abs() < 1e-12 && v <= 2.0 * MAX_VAR_FLOOR);
        assert_eq!(back[0], Gaussian::new(1.0, 2.0));
        assert!(back[1..].iter().all(|b| b.is_uniform()));
    }

    #[test]
    fn window_vs_monte_carlo() {
        let ms = [0.3, -0.2, 0.5, 0.1];
        let vs = [0.5, 1.2, 0.3, 0.8];
        let window: Vec<Gaussian> = ms
            .iter()
            .zip(&vs)
            .map(|(&m, &v)| Gaussian::from_moments(m, v).unwrap())
            .collect();
        let (f, back) = maxpool_messages(&window, Gaussian::new(0.2, 1.0)).unwrap();
        assert!(!back[2].is_uniform());
        let mut z = normal_stream(4);
        let mut acc = Running::default();
        for _ in 0..10_000_000 {
            let x = (0..4)
                .map(|i| ms[i] + vs[i].sqrt() * z())
                .fold(f64::NEG_INFINITY, f64::max);
            acc.push(x);
        }
        assert!((f.mean() - acc.mean()).abs() < 0.02);
        assert!(maxpool_messages(&[], Gaussian::UNIFORM).is_err());
    }

    #[test]
    fn far_apart_inputs() {
        let (m, v) = clark_max(1e6, 1.0, 0.0, 1.0);
        assert!((m - 1e6).abs() < 1e-6 && (v - 1.0).abs() < 1e-6);
        assert_eq!(winner(&[0.0, 3.0, 3.0, -1.0]), 1);
    }
}
