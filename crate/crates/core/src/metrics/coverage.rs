//! Coverage of credible intervals outside the training range.
//!
//! An ensemble of independently seeded networks is fitted to one sine
//! dataset. For every credible mass `p` and grid point `x` we count how many
//! members' central `p`-intervals contain the true function. Medians of those
//! rates far left and far right of the data are then correlated with `p`;
//! a well calibrated posterior gives medians close to `p` itself.

use crate::data::sine;
use crate::error::{Error, Result};
use crate::layers::{LayerSpec, Network, Predictive};
use crate::normal::std_normal_quantile;
use crate::trainer::{TrainConfig, Trainer};

/// Central interval holding mass `p` of `N(mean, var)`.
pub fn interval(mean: f64, var: f64, p: f64) -> (f64, f64) {
    let sd = var.sqrt();
    (
        mean + sd * std_normal_quantile(0.5 - p / 2.0),
        mean + sd * std_normal_quantile(0.5 + p / 2.0),
    )
}

/// Evenly spaced points `lo, lo + step, ...` up to `hi` inclusive.
pub fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    // scaled from the span so integer grid points come out exact
    (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect()
}

/// Coverage rate per `(p, x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverageGrid {
    pub ps: Vec<f64>,
    pub xs: Vec<f64>,
    /// `rates[i][j]` is the rate for `ps[i]` at `xs[j]`.
    pub rates: Vec<Vec<f64>>,
}

impl CoverageGrid {
    /// `members[s][j]` is member `s`'s predictive `(mean, var)` at `xs[j]`.
    pub fn new(
        ps: Vec<f64>,
        xs: Vec<f64>,
        members: &[Vec<(f64, f64)>],
        truth: &[f64],
    ) -> Result<Self> {
        if truth.len() != xs.len() || members.iter().any(|m| m.len() != xs.len()) {
            return Err(Error::Shape(
                "coverage arrays disagree with the x grid".into(),
            ));
        }
        if members.is_empty() {
            return Err(Error::Shape("coverage needs at least one member".into()));
        }
        let rates = ps
            .iter()
            .map(|&p| {
                (0..xs.len())
                    .map(|j| {
                        let hits = members
                            .iter()
                            .filter(|m| {
                                let (lo, hi) = interval(m[j].0, m[j].1, p);
                                lo <= truth[j] && truth[j] <= hi
                            })
                            .count();
                        hits as f64 / members.len() as f64
                    })
                    .collect()
            })
            .collect();
        Ok(CoverageGrid { ps, xs, rates })
    }

    /// Per-`p` median rate over grid points with `x > threshold` and with
    /// `x < -threshold`.
    pub fn medians(&self, threshold: f64) -> (Vec<f64>, Vec<f64>) {
        let pick = |keep: &dyn Fn(f64) -> bool| -> Vec<f64> {
            self.rates
                .iter()
                .map(|row| {
                    let vals: Vec<f64> = self
                        .xs
                        .iter()
                        .zip(row)
                        .filter(|(x, _)| keep(**x))
                        .map(|(_, r)| *r)
                        .collect();
                    median(vals)
                })
                .collect()
        };
        (pick(&|x| x > threshold), pick(&|x| x < -threshold))
    }
}

/// Median, averaging the middle pair for even counts. `NaN` when empty.
pub fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Pearson correlation, `None` if either side has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    (saa > 0.0 && sbb > 0.0).then(|| sab / (saa * sbb).sqrt())
}

/// Correlations between `p` and the coverage medians.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverageSummary {
    pub positive: Option<f64>,
    pub negative: Option<f64>,
    /// Both median sets pooled against `p`.
    pub combined: Option<f64>,
    pub median_positive: Vec<f64>,
    pub median_negative: Vec<f64>,
}

pub fn summarize(grid: &CoverageGrid, threshold: f64) -> CoverageSummary {
    let (pos, neg) = grid.medians(threshold);
    let ps2: Vec<f64> = grid.ps.iter().chain(&grid.ps).copied().collect();
    let both: Vec<f64> = pos.iter().chain(&neg).copied().collect();
    CoverageSummary {
        positive: pearson(&grid.ps, &pos),
        negative: pearson(&grid.ps, &neg),
        combined: pearson(&ps2, &both),
        median_positive: pos,
        median_negative: neg,
    }
}

/// Setup of the ensemble experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverageConfig {
    pub seeds: usize,
    /// Seed of member 0; member `s` uses `first_seed + s`.
    pub first_seed: u64,
    pub data_seed: u64,
    pub points: usize,
    pub range: (f64, f64),
    pub noise: f64,
    pub width: usize,
    /// Number of linear layers including the output layer.
    pub depth: usize,
    pub iterations: usize,
    pub x_grid: (f64, f64, f64),
    pub p_step: f64,
    pub threshold: f64,
    /// Add the observation noise to the interval variance.
    pub include_noise: bool,
    pub prior_target_variance: f64,
    pub bias_prior_variance: f64,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        CoverageConfig {
            seeds: 20,
            first_seed: 1,
            data_seed: 0,
            points: 200,
            range: (-0.5, 0.5),
            noise: 0.05,
            width: 32,
            depth: 3,
            iterations: 500,
            x_grid: (-20.0, 20.0, 0.05),
            p_step: 0.01,
            threshold: 10.0,
            include_noise: false,
            prior_target_variance: 1.5,
            bias_prior_variance: 0.5,
        }
    }
}

impl CoverageConfig {
    /// The MLP used for every member.
    pub fn model(&self) -> Vec<LayerSpec> {
        let mut spec = vec![LayerSpec::Input(vec![1])];
        for _ in 1..self.depth {
            spec.push(LayerSpec::Linear {
                out: self.width,
                bias: true,
            });
            spec.push(LayerSpec::LeakyRelu(0.1));
        }
        spec.push(LayerSpec::Linear { out: 1, bias: true });
        spec.push(LayerSpec::Regression(self.noise * self.noise));
        spec
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageResult {
    pub grid: CoverageGrid,
    pub summary: CoverageSummary,
}

/// Trains the ensemble and scores its intervals against the sine function.
/// `progress` is called after each member with its index.
pub fn run(cfg: &CoverageConfig, mut progress: impl FnMut(usize)) -> Result<CoverageResult> {
    if cfg.seeds == 0 || cfg.depth == 0 || !(cfg.p_step > 0.0) || !(cfg.x_grid.2 > 0.0) {
        return Err(Error::Config(
            "coverage needs seeds, depth and positive steps".into(),
        ));
    }
    let data = sine::synth(cfg.points, cfg.range, cfg.noise, cfg.data_seed)?;
    let (lo, hi, step) = cfg.x_grid;
    let xs = grid(lo, hi, step);
    let ps = grid(0.0, 1.0, cfg.p_step);
    let truth: Vec<f64> = xs.iter().map(|&x| sine::truth(x)).collect();
    let mut members = Vec::with_capacity(cfg.seeds);
    for s in 0..cfg.seeds {
        let tc = TrainConfig {
            batch_size: cfg.points,
            epochs: 1,
            iterations: Some(cfg.iterations),
            seed: cfg.first_seed + s as u64,
            prior_target_variance: cfg.prior_target_variance,
            bias_prior_variance: cfg.bias_prior_variance,
            ..TrainConfig::default()
        };
        let mut t = Trainer::new(Network::new(&cfg.model())?, tc, data.len())?;
        t.train(&data)?;
        let preds = xs
            .iter()
            .map(|&x| match t.net.predict(&[x])? {
                Predictive::Regression {
                    mean,
                    latent_var,
                    beta2,
                } => Ok((
                    mean,
                    if cfg.include_noise {
                        latent_var + beta2
                    } else {
                        latent_var
                    },
                )),
                Predictive::Classes(_) => {
                    Err(Error::Shape("coverage needs a regression head".into()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        members.push(preds);
        progress(s);
    }
    let grid = CoverageGrid::new(ps, xs, &members, &truth)?;
    let summary = summarize(&grid, cfg.threshold);
    Ok(CoverageResult { grid, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal::std_normal_cdf;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn interval_mass() {
        for &p in &[0.1, 0.5, 0.9, 0.99] {
            let (lo, hi) = interval(1.0, 4.0, p);
            let mass = std_normal_cdf((hi - 1.0) / 2.0) - std_normal_cdf((lo - 1.0) / 2.0);
            assert!((mass - p).abs() < 1e-10);
        }
    }

    #[test]
    fn extreme_masses() {
        let members = vec![vec![(0.3, 1.0), (-2.0, 0.5)]; 3];
        let g = CoverageGrid::new(vec![0.0, 1.0], vec![0.0, 1.0], &members, &[0.0, 7.0]).unwrap();
        assert_eq!(g.rates[0], vec![0.0, 0.0]);
        assert_eq!(g.rates[1], vec![1.0, 1.0]);
    }

    #[test]
    fn exact_posterior_is_calibrated() {
        // members whose errors really are N(0, var): coverage tracks p
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let xs = grid(-20.0, 20.0, 0.5);
        let truth: Vec<f64> = xs.iter().map(|&x| sine::truth(x)).collect();
        let members: Vec<Vec<(f64, f64)>> = (0..400)
            .map(|_| {
                truth
                    .iter()
                    .map(|&f| (f + Normal::new(0.0, 2.0).unwrap().sample(&mut rng), 4.0))
                    .collect()
            })
            .collect();
        let g = CoverageGrid::new(grid(0.0, 1.0, 0.01), xs, &members, &truth).unwrap();
        let s = summarize(&g, 10.0);
        assert!(s.combined.unwrap() > 0.99);
        for (p, m) in g.ps.iter().zip(&s.median_positive) {
            assert!((p - m).abs() < 0.08);
        }
    }

    #[test]
    fn pearson_values() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(pearson(&[1.0, 2.0], &[5.0, 5.0]), None);
        assert_eq!(median(vec![3.0, 1.0, 2.0, 10.0]), 2.5);
    }

    #[test]
    fn grid_endpoints() {
        let g = grid(-20.0, 20.0, 0.05);
        assert_eq!(g.len(), 801);
        assert!((g[800] - 20.0).abs() < 1e-12);
        assert_eq!(g.iter().filter(|&&x| x > 10.0).count(), 200);
    }

    #[test]
    fn tiny_ensemble_runs() {
        let cfg = CoverageConfig {
            seeds: 2,
            points: 20,
            width: 4,
            iterations: 3,
            x_grid: (-12.0, 12.0, 1.0),
            p_step: 0.25,
            ..CoverageConfig::default()
        };
        let mut seen = Vec::new();
        let r = run(&cfg, |s| seen.push(s)).unwrap();
        assert_eq!(seen, vec![0, 1]);
        assert_eq!(r.grid.rates.len(), 5);
        assert!(r
            .grid
            .rates
            .iter()
            .flatten()
            .all(|v| (0.0..=1.0).contains(v)));
    }
}
