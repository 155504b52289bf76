//! Training schedule: priors, batches, damping and the iteration ramp.
//!
//! The marginal of every weight is `prior * (aggregates of inactive
//! batches) * (messages of the active batch's examples)`. When a batch is
//! retired, its examples' messages are multiplied into one aggregate, which
//! is damped against the aggregate from the batch's previous visit. When it
//! comes back, the aggregate is divided out again and the per-example
//! messages take its place, so no example is ever counted twice.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::gaussian::Gaussian;
use crate::layers::{ExampleState, Incidents, Layer, Network};
use crate::rng::{stream, Stream};

/// What survives of an example's messages after its batch is retired.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Retention {
    /// Keep every message so a revisit can divide out exactly.
    PerExample,
    /// Keep only the batch aggregate; revisits start from `G(0, 0)`.
    AggregateOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    /// Passes per batch visit. `None` ramps from 1 up to 4 over training.
    pub iterations: Option<usize>,
    /// Weight of the new aggregate when damping, in `(0, 1]`.
    pub damping: f64,
    pub seed: u64,
    pub prior_target_variance: f64,
    pub bias_prior_variance: f64,
    pub retention: Retention,
    /// Seeded reordering of batches and examples every epoch.
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 128,
            epochs: 1,
            iterations: None,
            damping: 0.7,
            seed: 0,
            prior_target_variance: 1.5,
            bias_prior_variance: 0.5,
            retention: Retention::PerExample,
            shuffle: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Config(format!(
                "damping {} is outside (0, 1]",
                self.damping
            )));
        }
        if !(self.prior_target_variance > INNER_GAIN) || !self.prior_target_variance.is_finite() {
            return Err(Error::Config(format!(
                "prior_target_variance {} must exceed {INNER_GAIN}",
                self.prior_target_variance
            )));
        }
        if !(self.bias_prior_variance > 0.0) || !self.bias_prior_variance.is_finite() {
            return Err(Error::Config(format!(
                "bias_prior_variance {} must be positive",
                self.bias_prior_variance
            )));
        }
        Ok(())
    }

    /// Passes over each batch during `epoch` (0-based).
    pub fn iterations_for(&self, epoch: usize) -> usize {
        match self.iterations {
            Some(n) => n,
            None => (1 + epoch / (self.epochs / 4).max(1)).min(4),
        }
    }
}

const INNER_GAIN: f64 = 0.8041;
const INNER_SLOPE: f64 = 0.4496;

/// Prior variance of a weight behind LeakyReLU units with fan-in `d1`
/// and fan-out `d2`.
pub fn prior_variance(d1: usize, d2: usize, target: f64) -> f64 {
    let ratio = (d2 as f64 / d1 as f64).min(1.0);
    (target - INNER_GAIN * ratio) / (INNER_GAIN + INNER_SLOPE * d1 as f64)
}

/// Standard deviation of the prior means.
pub fn spectral_scale(d1: usize, d2: usize) -> f64 {
    (1.0 / (d1 as f64).sqrt()) * (d2 as f64 / d1 as f64).sqrt().min(1.0)
}

/// Sets every weight prior of `net` and resets the marginals to it.
///
/// The first parametric layer sees observed inputs and gets variance
/// `target / d1`; later layers use [`prior_variance`]. Means are drawn
/// from `N(0, spectral_scale^2)`, biases get `N(0, bias_var)`.
pub fn init_priors(net: &mut Network, seed: u64, target: f64, bias_var: f64) {
    let observed = net.observed;
    for (j, layer) in net.layers.iter_mut().enumerate() {
        let (d1, d2) = match layer {
            Layer::Linear(l) => (l.d_in, l.d_out),
            Layer::Conv(c) => (c.fan_in(), c.c_out),
            _ => continue,
        };
        let var = if j <= observed {
            target / d1 as f64
        } else {
            prior_variance(d1, d2, target)
        };
        let mut rng = stream(seed, Stream::Prior(j as u32));
        let means = Normal::new(0.0, spectral_scale(d1, d2)).expect("finite scale");
        let n = layer.weights().expect("parametric").len();
        let prior = (0..n)
            .map(|k| {
                let is_bias = match layer {
                    Layer::Linear(l) => l.is_bias(k),
                    Layer::Conv(c) => c.is_bias(k),
                    _ => unreachable!(),
                };
                if is_bias {
                    Gaussian::from_moments(0.0, bias_var).expect("positive")
                } else {
                    Gaussian::from_moments(means.sample(&mut rng), var).expect("positive")
                }
            })
            .collect();
        layer.weights_mut().expect("parametric").set_prior(prior);
    }
}

/// Blends natural parameters: `lambda * new + (1 - lambda) * old`.
pub fn apply_damping(old: &[Gaussian], new: &[Gaussian], lambda: f64) -> Vec<Gaussian> {
    old.iter()
        .zip(new)
        .map(|(o, n)| n.scale(lambda) * o.scale(1.0 - lambda))
        .collect()
}

/// Summary of one epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochReport {
    pub epoch: usize,
    pub iterations: usize,
    pub incidents: Incidents,
    pub seconds: f64,
}

/// Per-layer vectors of weight messages, empty for layers without weights.
type LayerMessages = Vec<Vec<Gaussian>>;

pub struct Trainer {
    pub net: Network,
    pub config: TrainConfig,
    batches: Vec<Vec<usize>>,
    aggregates: Vec<Option<LayerMessages>>,
    states: Vec<Option<ExampleState>>,
    active: Option<usize>,
    others: LayerMessages,
    epoch: usize,
    pub incidents: Incidents,
    damping_applications: u64,
}

impl Trainer {
    /// Initializes priors from the config seed for a dataset of `n` examples.
    pub fn new(mut net: Network, config: TrainConfig, n: usize) -> Result<Self> {
        config.validate()?;
        init_priors(
            &mut net,
            config.seed,
            config.prior_target_variance,
            config.bias_prior_variance,
        );
        Self::with_state(net, config, n, Vec::new(), 0)
    }

    /// Rebuilds a trainer around an existing network and batch aggregates.
    ///
    /// Marginals are recomputed from priors and aggregates; per-example
    /// messages start from `G(0, 0)`.
    pub fn with_state(
        net: Network,
        config: TrainConfig,
        n: usize,
        aggregates: Vec<Option<LayerMessages>>,
        epoch: usize,
    ) -> Result<Self> {
        config.validate()?;
        let batches: Vec<Vec<usize>> = (0..n)
            .collect::<Vec<_>>()
            .chunks(config.batch_size)
            .map(<[usize]>::to_vec)
            .collect();
        let aggregates = if aggregates.is_empty() {
            vec![None; batches.len()]
        } else {
            aggregates
        };
        if aggregates.len() != batches.len() {
            return Err(Error::Checkpoint(format!(
                "{} batch aggregates for {} batches",
                aggregates.len(),
                batches.len()
            )));
        }
        let mut t = Trainer {
            others: Vec::new(),
            net,
            config,
            batches,
            aggregates,
            states: vec![None; n],
            active: None,
            epoch,
            incidents: Incidents::default(),
            damping_applications: 0,
        };
        t.others = t.product_of_aggregates(None);
        t.recompute_marginals();
        Ok(t)
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn batches(&self) -> &[Vec<usize>] {
        &self.batches
    }

    pub fn aggregates(&self) -> &[Option<LayerMessages>] {
        &self.aggregates
    }

    pub fn active_batch(&self) -> Option<usize> {
        self.active
    }

    /// How many times an aggregate has been damped against its predecessor.
    pub fn damping_applications(&self) -> u64 {
        self.damping_applications
    }

    /// Retained messages of example `e`, if any.
    pub fn example_state(&self, e: usize) -> Option<&ExampleState> {
        self.states[e].as_ref()
    }

    fn product_of_aggregates(&self, skip: Option<usize>) -> LayerMessages {
        let mut out: LayerMessages = self
            .net
            .layers
            .iter()
            .map(|l| {
                l.weights()
                    .map_or(Vec::new(), |w| vec![Gaussian::UNIFORM; w.len()])
            })
            .collect();
        for (b, agg) in self.aggregates.iter().enumerate() {
            if Some(b) == skip {
                continue;
            }
            if let Some(agg) = agg {
                for (o, a) in out.iter_mut().zip(agg) {
                    for (x, y) in o.iter_mut().zip(a) {
                        *x *= *y;
                    }
                }
            }
        }
        out
    }

    /// Rebuilds every marginal from prior, inactive aggregates and the
    /// active batch's messages.
    pub fn recompute_marginals(&mut self) {
        let members: &[usize] = self.active.map_or(&[], |b| &self.batches[b]);
        for (j, layer) in self.net.layers.iter_mut().enumerate() {
            let Some(store) = layer.weights_mut() else {
                continue;
            };
            let states = &self.states;
            let active = members
                .iter()
                .filter_map(|&e| states[e].as_ref())
                .map(|s| s.weight_msgs[j].as_slice());
            self.incidents.clamped_marginals +=
                store.recompute(Some(&self.others[j]), active) as u64;
        }
    }

    /// Makes batch `b` active: its aggregate is divided out and its
    /// examples' retained messages (or `G(0, 0)`) are multiplied in.
    pub fn install(&mut self, b: usize) {
        assert!(self.active.is_none(), "retire the active batch first");
        for &e in &self.batches[b] {
            if self.states[e].is_none() {
                self.states[e] = Some(self.net.new_example());
            }
        }
        self.others = self.product_of_aggregates(Some(b));
        self.active = Some(b);
        self.recompute_marginals();
    }

    /// Folds the active batch's messages into its damped aggregate.
    pub fn retire(&mut self) {
        let Some(b) = self.active.take() else { return };
        let mut fresh: LayerMessages = self
            .net
            .layers
            .iter()
            .map(|l| {
                l.weights()
                    .map_or(Vec::new(), |w| vec![Gaussian::UNIFORM; w.len()])
            })
            .collect();
        for &e in &self.batches[b] {
            let st = self.states[e].as_ref().expect("installed");
            for (f, m) in fresh.iter_mut().zip(&st.weight_msgs) {
                for (x, y) in f.iter_mut().zip(m) {
                    *x *= *y;
                }
            }
        }
        let mut agg = match &self.aggregates[b] {
            None => fresh,
            Some(old) => {
                self.damping_applications += 1;
                old.iter()
                    .zip(&fresh)
                    .map(|(o, n)| apply_damping(o, n, self.config.damping))
                    .collect()
            }
        };
        for g in agg.iter_mut().flatten() {
            if !(g.rho >= 0.0) || !g.is_finite() {
                *g = Gaussian::UNIFORM;
                self.incidents.clamped_aggregates += 1;
            }
        }
        self.aggregates[b] = Some(agg);
        if self.config.retention == Retention::AggregateOnly {
            for &e in &self.batches[b] {
                self.states[e] = None;
            }
        }
        self.others = self.product_of_aggregates(None);
        self.recompute_marginals();
    }

    /// Retires the active batch (if any) and installs `b`.
    pub fn switch_batch(&mut self, b: usize) {
        self.retire();
        self.install(b);
    }

    /// One forward and one backward pass per example of the active batch,
    /// in `order`, followed by a fresh marginal recompute.
    fn batch_iteration(&mut self, data: &Dataset, order: &[usize]) -> Result<()> {
        for &e in order {
            let st = self.states[e].as_mut().expect("installed");
            self.net.forward(&data.inputs[e], st, &mut self.incidents)?;
            self.net
                .backward(&data.inputs[e], data.targets[e], st, &mut self.incidents)?;
        }
        self.recompute_marginals();
        Ok(())
    }

    pub fn run_epoch(&mut self, data: &Dataset) -> Result<EpochReport> {
        if data.len() != self.states.len() {
            return Err(Error::Shape(format!(
                "trainer was built for {} examples, dataset has {}",
                self.states.len(),
                data.len()
            )));
        }
        let start = Instant::now();
        let before = self.incidents;
        let iterations = self.config.iterations_for(self.epoch);
        if iterations > 0 {
            let mut rng = stream(self.config.seed, Stream::Shuffle(self.epoch as u32));
            let mut order: Vec<usize> = (0..self.batches.len()).collect();
            if self.config.shuffle {
                order.shuffle(&mut rng);
            }
            for b in order {
                self.switch_batch(b);
                let mut members = self.batches[b].clone();
                if self.config.shuffle {
                    members.shuffle(&mut rng);
                }
                for _ in 0..iterations {
                    self.batch_iteration(data, &members)?;
                }
            }
            self.retire();
        }
        let mut delta = self.incidents;
        subtract(&mut delta, &before);
        let report = EpochReport {
            epoch: self.epoch,
            iterations,
            incidents: delta,
            seconds: start.elapsed().as_secs_f64(),
        };
        self.epoch += 1;
        Ok(report)
    }

    /// Runs the remaining epochs of the configuration.
    pub fn train(&mut self, data: &Dataset) -> Result<Vec<EpochReport>> {
        let mut reports = Vec::new();
        while self.epoch < self.config.epochs {
            reports.push(self.run_epoch(data)?);
        }
        Ok(reports)
    }
}

fn subtract(a: &mut Incidents, b: &Incidents) {
    a.direct_fallbacks -= b.direct_fallbacks;
    a.uniform_fallbacks -= b.uniform_fallbacks;
    a.improper_cavities -= b.improper_cavities;
    a.dropped_terms -= b.dropped_terms;
    a.skipped_pairs -= b.skipped_pairs;
    a.clamped_marginals -= b.clamped_marginals;
    a.clamped_aggregates -= b.clamped_aggregates;
}
