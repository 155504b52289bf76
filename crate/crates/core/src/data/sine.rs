//! The synthetic regression curve used for the uncertainty experiments.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::Dataset;
use crate::error::{Error, Result};
use crate::layers::Target;
use crate::rng::{stream, Stream};

/// `0.5 x + 0.2 sin(2 pi x) + 0.3 sin(4 pi x)`.
pub fn truth(x: f64) -> f64 {
    0.5 * x + 0.2 * (2.0 * PI * x).sin() + 0.3 * (4.0 * PI * x).sin()
}

/// `n` points with `x ~ U(lo, hi)` and `y = truth(x) + N(0, sigma^2)`.
pub fn synth(n: usize, (lo, hi): (f64, f64), sigma: f64, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Config(
            "sine dataset needs at least one point".into(),
        ));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Config(format!("invalid x range ({lo}, {hi})")));
    }
    if !(sigma >= 0.0) {
        return Err(Error::Config(format!("invalid noise sigma {sigma}")));
    }
    let mut rng = stream(seed, Stream::Data);
    let noise = Normal::new(0.0, sigma).expect("checked sigma");
    let mut inputs = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let x = rng.gen_range(lo..hi);
        inputs.push(vec![x]);
        targets.push(Target::Value(truth(x) + noise.sample(&mut rng)));
    }
    Dataset::new(vec![1], inputs, targets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(truth(0.0), 0.0);
        // 0.125 + 0.2 sin(pi/2) + 0.3 sin(pi)
        assert!((truth(0.25) - 0.325).abs() < 1e-15);
    }

    #[test]
    fn dataset_protocol() {
        let d = synth(200, (0.0, 2.0), 0.05, 1).unwrap();
        assert_eq!(d.len(), 200);
        assert!(d.inputs.iter().all(|x| (0.0..2.0).contains(&x[0])));
        let resid: Vec<f64> = d
            .inputs
            .iter()
            .zip(d.values().unwrap())
            .map(|(x, y)| y - truth(x[0]))
            .collect();
        let sd = (resid.iter().map(|r| r * r).sum::<f64>() / 200.0).sqrt();
        assert!((sd - 0.05).abs() < 0.01, "{sd}");
        assert_eq!(d, synth(200, (0.0, 2.0), 0.05, 1).unwrap());
        assert_ne!(d, synth(200, (0.0, 2.0), 0.05, 2).unwrap());
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(synth(0, (0.0, 1.0), 0.1, 0).is_err());
        assert!(synth(5, (1.0, 1.0), 0.1, 0).is_err());
        assert!(synth(5, (0.0, 1.0), -0.1, 0).is_err());
    }
}
