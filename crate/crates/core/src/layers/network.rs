use crate::error::{Error, Result};
use crate::factors::guard::{FactorMessage, Fallback, GuardPolicy};
use crate::factors::{activation, heads, pool};
use crate::gaussian::Gaussian;
use crate::layers::affine::{self, Conv, Linear, Moments};
use crate::layers::weights::WeightStore;
use crate::layers::{numel, shape_infer, LayerSpec};

#[derive(Clone, Debug, PartialEq)]
pub enum Layer {
    Linear(Linear),
    Conv(Conv),
    LeakyRelu(f64),
    MaxPool { stride: usize, in_shape: [usize; 3] },
    Flatten,
}

impl Layer {
    pub fn weights(&self) -> Option<&WeightStore> {
        match self {
            Layer::Linear(l) => Some(&l.weights),
            Layer::Conv(c) => Some(&c.weights),
            _ => None,
        }
    }

    pub fn weights_mut(&mut self) -> Option<&mut WeightStore> {
        match self {
            Layer::Linear(l) => Some(&mut l.weights),
            Layer::Conv(c) => Some(&mut c.weights),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Head {
    Regression { beta2: f64 },
    Argmax { regularized: bool, gamma: f64 },
    Softmax,
}

/// What the head observes for one example.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Target {
    Value(f64),
    Class(usize),
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Predictive {
    /// Latent output `N(mean, latent_var)` plus observation noise `beta2`.
    Regression {
        mean: f64,
        latent_var: f64,
        beta2: f64,
    },
    Classes(Vec<f64>),
}

impl Predictive {
    /// Predictive variance including observation noise.
    pub fn total_var(&self) -> Option<f64> {
        match self {
            Predictive::Regression {
                latent_var, beta2, ..
            } => Some(latent_var + beta2),
            Predictive::Classes(_) => None,
        }
    }
}

/// Counters of guard activations and numerical repairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Incidents {
    pub direct_fallbacks: u64,
    pub uniform_fallbacks: u64,
    /// Weight cavities that were improper and replaced by the marginal.
    pub improper_cavities: u64,
    /// Inner-product terms dropped by the precision-scale guard.
    pub dropped_terms: u64,
    /// Argmax pairs skipped for negligible truncation mass.
    pub skipped_pairs: u64,
    /// Marginals reset to the prior after a recompute.
    pub clamped_marginals: u64,
    /// Aggregate entries reset to `G(0, 0)` on a batch switch.
    pub clamped_aggregates: u64,
}

impl Incidents {
    pub fn add(&mut self, o: &Incidents) {
        self.direct_fallbacks += o.direct_fallbacks;
        self.uniform_fallbacks += o.uniform_fallbacks;
        self.improper_cavities += o.improper_cavities;
        self.dropped_terms += o.dropped_terms;
        self.skipped_pairs += o.skipped_pairs;
        self.clamped_marginals += o.clamped_marginals;
        self.clamped_aggregates += o.clamped_aggregates;
    }

    pub fn total(&self) -> u64 {
        self.direct_fallbacks
            + self.uniform_fallbacks
            + self.improper_cavities
            + self.dropped_terms
            + self.skipped_pairs
            + self.clamped_marginals
            + self.clamped_aggregates
    }

    fn record(&mut self, r: &FactorMessage) {
        match r.fallback {
            Fallback::None => {}
            Fallback::Direct => self.direct_fallbacks += 1,
            Fallback::Uniform => self.uniform_fallbacks += 1,
        }
    }
}

/// Messages retained for one training example.
///
/// `up[i]` and `down[i]` are the messages into boundary `i` from its left
/// and right neighbour; observed boundaries keep empty vectors.
/// `weight_msgs[j]` holds this example's factor-to-weight messages for
/// layer `j` (empty for layers without weights).
#[derive(Clone, Debug, PartialEq)]
pub struct ExampleState {
    pub up: Vec<Vec<Gaussian>>,
    pub down: Vec<Vec<Gaussian>>,
    pub weight_msgs: Vec<Vec<Gaussian>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub specs: Vec<LayerSpec>,
    pub layers: Vec<Layer>,
    pub head: Head,
    /// Boundary shapes `0..=L`.
    pub shapes: Vec<Vec<usize>>,
    /// Boundaries `0..=observed` carry the observed input unchanged.
    pub observed: usize,
    pub guard: GuardPolicy,
}

impl Network {
    pub fn new(specs: &[LayerSpec]) -> Result<Network> {
        let all = shape_infer(specs)?;
        let mut layers = Vec::new();
        for (i, spec) in specs.iter().enumerate().take(specs.len() - 1).skip(1) {
            let input = &all[i - 1];
            layers.push(match *spec {
                LayerSpec::Linear { out, bias } => Layer::Linear(Linear::new(input[0], out, bias)),
                LayerSpec::Conv {
                    out_channels,
                    kernel,
                    padding,
                } => Layer::Conv(Conv::new(
                    [input[0], input[1], input[2]],
                    out_channels,
                    kernel,
                    padding,
                )),
                LayerSpec::LeakyRelu(a) => Layer::LeakyRelu(a),
                LayerSpec::MaxPool(stride) => Layer::MaxPool {
                    stride,
                    in_shape: [input[0], input[1], input[2]],
                },
                LayerSpec::Flatten => Layer::Flatten,
                _ => unreachable!("shape_infer admits only hidden layers here"),
            });
        }
        let head = match *specs.last().expect("validated") {
            LayerSpec::Regression(beta2) => Head::Regression { beta2 },
            LayerSpec::Argmax { regularized, gamma } => Head::Argmax { regularized, gamma },
            LayerSpec::Softmax => Head::Softmax,
            _ => unreachable!("shape_infer requires a head"),
        };
        let observed = layers
            .iter()
            .take_while(|l| matches!(l, Layer::Flatten))
            .count();
        Ok(Network {
            specs: specs.to_vec(),
            layers,
            head,
            shapes: all[..all.len() - 1].to_vec(),
            observed,
            guard: GuardPolicy::default(),
        })
    }

    pub fn input_len(&self) -> usize {
        numel(&self.shapes[0])
    }

    pub fn output_len(&self) -> usize {
        numel(self.shapes.last().expect("non-empty"))
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .filter_map(|l| l.weights())
            .map(|w| w.len())
            .sum()
    }

    /// Fresh message storage: everything `G(0, 0)`.
    pub fn new_example(&self) -> ExampleState {
        let boundary = |i: usize| {
            if i <= self.observed {
                Vec::new()
            } else {
                vec![Gaussian::UNIFORM; numel(&self.shapes[i])]
            }
        };
        let n = self.shapes.len();
        ExampleState {
            up: (0..n).map(boundary).collect(),
            down: (0..n).map(boundary).collect(),
            weight_msgs: self
                .layers
                .iter()
                .map(|l| {
                    l.weights()
                        .map_or(Vec::new(), |w| vec![Gaussian::UNIFORM; w.len()])
                })
                .collect(),
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_len() {
            return Err(Error::Shape(format!(
                "input has {} values, model expects {:?}",
                x.len(),
                self.shapes[0]
            )));
        }
        Ok(())
    }

    /// Moments of each weight with this example's own message divided out.
    fn cavity(&self, j: usize, st: &ExampleState, inc: &mut Incidents) -> Moments {
        let store = self.layers[j].weights().expect("parametric layer");
        let own = &st.weight_msgs[j];
        Moments::of(store.marginal.iter().zip(own).map(|(m, e)| {
            let c = *m / *e;
            if c.is_proper() {
                c
            } else {
                inc.improper_cavities += 1;
                *m
            }
        }))
    }

    /// Moments of the variables at boundary `j` as seen by the layer above.
    fn input_moments(&self, j: usize, x: &[f64], st: &ExampleState) -> Moments {
        if j <= self.observed {
            return Moments::observed(x);
        }
        Moments::of(st.up[j].iter().zip(&st.down[j]).map(|(u, d)| {
            let m = *u * *d;
            if m.is_proper() {
                m
            } else {
                *u
            }
        }))
    }

    /// Forward sweep of one example through every hidden layer.
    pub fn forward(&self, x: &[f64], st: &mut ExampleState, inc: &mut Incidents) -> Result<()> {
        self.check_input(x)?;
        for j in 0..self.layers.len() {
            let out = match &self.layers[j] {
                Layer::Linear(l) => {
                    affine::forward(l, &self.cavity(j, st, inc), &self.input_moments(j, x, st))
                }
                Layer::Conv(c) => {
                    affine::forward(c, &self.cavity(j, st, inc), &self.input_moments(j, x, st))
                }
                Layer::LeakyRelu(alpha) => {
                    let mut out = Vec::with_capacity(st.up[j].len());
                    for (z, a) in st.up[j].iter().zip(&st.down[j + 1]) {
                        let r = activation::leakyrelu_forward_marginal(*alpha, *z, *a, &self.guard)
                            .unwrap_or_else(|_| FactorMessage::uniform());
                        inc.record(&r);
                        out.push(r.message);
                    }
                    out
                }
                Layer::MaxPool { stride, in_shape } => {
                    maxpool_forward(*stride, *in_shape, &st.up[j])?
                }
                Layer::Flatten => {
                    if j < self.observed {
                        continue;
                    }
                    st.up[j].clone()
                }
            };
            st.up[j + 1] = out;
        }
        Ok(())
    }

    /// Head messages into the last boundary.
    fn head_backward(
        &self,
        target: Target,
        st: &mut ExampleState,
        inc: &mut Incidents,
    ) -> Result<()> {
        let last = self.shapes.len() - 1;
        let logits = &st.up[last];
        let down = match (self.head, target) {
            (_, Target::Unknown) => vec![Gaussian::UNIFORM; logits.len()],
            (Head::Regression { beta2 }, Target::Value(y)) => {
                vec![heads::regression_backward(Some(y), beta2)?]
            }
            (Head::Argmax { regularized, gamma }, Target::Class(c)) => {
                let (mus, vars) = moments_of(logits)?;
                let r = heads::argmax_backward(c, &mus, &vars, regularized.then_some(gamma))?;
                inc.skipped_pairs += r.skipped as u64;
                r.messages
            }
            (Head::Softmax, Target::Class(c)) => {
                let (mus, vars) = moments_of(logits)?;
                let mut out = Vec::with_capacity(mus.len());
                for d in 0..mus.len() {
                    let r = heads::softmax_backward(c, d, &mus, &vars)?;
                    inc.record(&r);
                    out.push(r.message);
                }
                out
            }
            (h, t) => {
                return Err(Error::Shape(format!(
                    "target {t:?} does not fit head {h:?}"
                )));
            }
        };
        st.down[last] = down;
        Ok(())
    }

    /// Backward sweep of one example; updates weight marginals in place.
    pub fn backward(
        &mut self,
        x: &[f64],
        target: Target,
        st: &mut ExampleState,
        inc: &mut Incidents,
    ) -> Result<()> {
        self.check_input(x)?;
        self.head_backward(target, st, inc)?;
        for j in (0..self.layers.len()).rev() {
            let input_observed = j <= self.observed;
            let new_down = match &self.layers[j] {
                Layer::Linear(_) | Layer::Conv(_) => {
                    let w = self.cavity(j, st, inc);
                    let xm = self.input_moments(j, x, st);
                    let n_w = w.e.len();
                    let mut to_w = vec![Gaussian::UNIFORM; n_w];
                    let mut to_x = (!input_observed).then(|| vec![Gaussian::UNIFORM; xm.e.len()]);
                    let down = &st.down[j + 1];
                    inc.dropped_terms += match &self.layers[j] {
                        Layer::Linear(l) => {
                            affine::backward(l, &w, &xm, down, &mut to_w, to_x.as_deref_mut())
                        }
                        Layer::Conv(c) => {
                            affine::backward(c, &w, &xm, down, &mut to_w, to_x.as_deref_mut())
                        }
                        _ => unreachable!(),
                    };
                    let store = self.layers[j].weights_mut().expect("parametric layer");
                    for (k, new) in to_w.into_iter().enumerate() {
                        store.swap_message(k, st.weight_msgs[j][k], new);
                        st.weight_msgs[j][k] = new;
                    }
                    to_x
                }
                Layer::LeakyRelu(alpha) => {
                    let mut out = Vec::with_capacity(st.up[j].len());
                    for (z, a) in st.up[j].iter().zip(&st.down[j + 1]) {
                        let r = activation::leakyrelu_backward(*alpha, *z, *a, &self.guard)
                            .unwrap_or_else(|_| FactorMessage::uniform());
                        inc.record(&r);
                        out.push(r.message);
                    }
                    Some(out)
                }
                Layer::MaxPool { stride, in_shape } => Some(maxpool_backward(
                    *stride,
                    *in_shape,
                    &st.up[j],
                    &st.down[j + 1],
                )),
                Layer::Flatten => (!input_observed).then(|| st.down[j + 1].clone()),
            };
            if let Some(d) = new_down {
                st.down[j] = d;
            }
        }
        Ok(())
    }

    /// Prediction branch: one forward pass with full weight marginals and no
    /// downstream information.
    pub fn predict(&self, x: &[f64]) -> Result<Predictive> {
        let mut st = self.new_example();
        let mut inc = Incidents::default();
        self.forward(x, &mut st, &mut inc)?;
        self.predict_from(&st)
    }

    /// Head forward message from the last boundary of `st`.
    pub fn predict_from(&self, st: &ExampleState) -> Result<Predictive> {
        let logits = st.up.last().expect("non-empty");
        let (mus, vars) = moments_of(logits)?;
        Ok(match self.head {
            Head::Regression { beta2 } => Predictive::Regression {
                mean: mus[0],
                latent_var: vars[0],
                beta2,
            },
            Head::Argmax { .. } => Predictive::Classes(heads::argmax_probs(&mus, &vars)?),
            Head::Softmax => Predictive::Classes(heads::softmax_probs(&mus, &vars)?),
        })
    }
}

fn moments_of(gs: &[Gaussian]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut mus = Vec::with_capacity(gs.len());
    let mut vars = Vec::with_capacity(gs.len());
    for g in gs {
        let (m, v) = g.to_moments()?;
        mus.push(m);
        vars.push(v);
    }
    Ok((mus, vars))
}

/// Input indices of pooling window `o`.
fn window(stride: usize, [_, h, w]: [usize; 3], o: usize) -> impl Iterator<Item = usize> {
    let (oh, ow) = (h / stride, w / stride);
    let c = o / (oh * ow);
    let oy = (o / ow) % oh;
    let ox = o % ow;
    (0..stride * stride).map(move |t| {
        let (dy, dx) = (t / stride, t % stride);
        (c * h + oy * stride + dy) * w + ox * stride + dx
    })
}

fn pool_outputs(stride: usize, [c, h, w]: [usize; 3]) -> usize {
    c * (h / stride) * (w / stride)
}

fn maxpool_forward(stride: usize, shape: [usize; 3], up: &[Gaussian]) -> Result<Vec<Gaussian>> {
    (0..pool_outputs(stride, shape))
        .map(|o| {
            let win: Vec<Gaussian> = window(stride, shape, o).map(|i| up[i]).collect();
            pool::maxpool_messages(&win, Gaussian::UNIFORM).map(|(f, _)| f)
        })
        .collect()
}

fn maxpool_backward(
    stride: usize,
    shape: [usize; 3],
    up: &[Gaussian],
    down: &[Gaussian],
) -> Vec<Gaussian> {
    let mut out = vec![Gaussian::UNIFORM; up.len()];
    for (o, d) in down.iter().enumerate() {
        let idx: Vec<usize> = window(stride, shape, o).collect();
        let means: Vec<f64> = idx.iter().map(|&i| up[i].mean()).collect();
        out[idx[pool::winner(&means)]] = *d;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mlp(width: usize, head: LayerSpec) -> Vec<LayerSpec> {
        vec![
            LayerSpec::Input(vec![2]),
            LayerSpec::Linear {
                out: width,
                bias: true,
            },
            LayerSpec::LeakyRelu(0.1),
            LayerSpec::Linear { out: 2, bias: true },
            head,
        ]
    }

    fn set_all(net: &mut Network, f: impl Fn(usize) -> Gaussian) {
        for l in &mut net.layers {
            if let Some(w) = l.weights_mut() {
                let p = (0..w.len()).map(&f).collect();
                w.set_prior(p);
            }
        }
    }

    #[test]
    fn identity_activation_passes_messages_through() {
        let specs = vec![
            LayerSpec::Input(vec![2]),
            LayerSpec::Linear { out: 3, bias: true },
            LayerSpec::LeakyRelu(1.0),
            LayerSpec::Linear { out: 1, bias: true },
            LayerSpec::Regression(0.1),
        ];
        let mut net = Network::new(&specs).unwrap();
        set_all(&mut net, |i| {
            Gaussian::from_moments(0.1 * i as f64 - 0.3, 0.2).unwrap()
        });
        let mut st = net.new_example();
        let mut inc = Incidents::default();
        net.forward(&[0.5, -1.0], &mut st, &mut inc).unwrap();
        for (a, b) in st.up[1].iter().zip(&st.up[2]) {
            assert!((a.tau - b.tau).abs() < 1e-12 * a.tau.abs().max(1.0));
            assert!((a.rho - b.rho).abs() < 1e-12 * a.rho);
        }
        net.backward(&[0.5, -1.0], Target::Value(0.3), &mut st, &mut inc)
            .unwrap();
        net.forward(&[0.5, -1.0], &mut st, &mut inc).unwrap();
        net.backward(&[0.5, -1.0], Target::Value(0.3), &mut st, &mut inc)
            .unwrap();
        for (a, b) in st.down[1].iter().zip(&st.down[2]) {
            assert!(
                (a.tau - b.tau).abs() < 1e-9 * a.tau.abs().max(1.0),
                "{a} {b}"
            );
            assert!((a.rho - b.rho).abs() < 1e-9 * a.rho.max(1e-12), "{a} {b}");
        }
    }

    #[test]
    fn flatten_is_bit_identical() {
        let specs = vec![
            LayerSpec::Input(vec![1, 4, 4]),
            LayerSpec::Conv {
                out_channels: 2,
                kernel: 3,
                padding: 0,
            },
            LayerSpec::Flatten,
            LayerSpec::Linear { out: 2, bias: true },
            LayerSpec::Softmax,
        ];
        let mut net = Network::new(&specs).unwrap();
        set_all(&mut net, |i| {
            Gaussian::from_moments(((i % 5) as f64 - 2.0) / 4.0, 0.3).unwrap()
        });
        let x: Vec<f64> = (0..16).map(|i| (i as f64 / 8.0).sin()).collect();
        let mut st = net.new_example();
        let mut inc = Incidents::default();
        net.forward(&x, &mut st, &mut inc).unwrap();
        net.backward(&x, Target::Class(1), &mut st, &mut inc)
            .unwrap();
        assert_eq!(st.up[1], st.up[2]);
        assert_eq!(st.down[1], st.down[2]);
    }

    #[test]
    fn argmax_backward_raises_winning_logit() {
        let mut net = Network::new(&mlp(
            4,
            LayerSpec::Argmax {
                regularized: false,
                gamma: 1.0,
            },
        ))
        .unwrap();
        set_all(&mut net, |i| {
            Gaussian::from_moments(((i * 7 % 5) as f64 - 2.0) / 5.0, 0.5).unwrap()
        });
        let x = [0.3, -0.8];
        let mut st = net.new_example();
        let mut inc = Incidents::default();
        net.forward(&x, &mut st, &mut inc).unwrap();
        let before: Vec<f64> = st.up[3].iter().map(|g| g.mean()).collect();
        net.backward(&x, Target::Class(1), &mut st, &mut inc)
            .unwrap();
        let after: Vec<f64> = st.up[3]
            .iter()
            .zip(&st.down[3])
            .map(|(u, d)| (*u * *d).mean())
            .collect();
        assert!(after[1] > before[1]);
        assert!(after[0] < before[0]);
        // explicit truncated-Gaussian computation of the class-1 marginal
        let (mu, var) = (
            before[1] - before[0],
            st.up[3][0].variance() + st.up[3][1].variance(),
        );
        let (tm, _) = crate::factors::heads::truncated_mean_var(mu, var);
        let share = st.up[3][1].variance() / var;
        assert!((after[1] - (before[1] + share * (tm - mu))).abs() < 1e-10);
    }

    #[test]
    fn degenerate_limit_matches_deterministic_network() {
        let specs = vec![
            LayerSpec::Input(vec![1, 4, 4]),
            LayerSpec::Conv {
                out_channels: 2,
                kernel: 3,
                padding: 1,
            },
            LayerSpec::LeakyRelu(0.1),
            LayerSpec::MaxPool(2),
            LayerSpec::Flatten,
            LayerSpec::Linear { out: 3, bias: true },
            LayerSpec::LeakyRelu(0.1),
            LayerSpec::Linear { out: 2, bias: true },
            LayerSpec::Softmax,
        ];
        let mut net = Network::new(&specs).unwrap();
        net.guard = GuardPolicy::permissive();
        let wmean = |i: usize| ((i * 31 % 17) as f64 - 8.0) / 9.0;
        set_all(&mut net, |i| {
            Gaussian::from_moments(wmean(i), 1e-12).unwrap()
        });
        let x: Vec<f64> = (0..16).map(|i| ((i * 5 % 7) as f64 - 3.0) / 2.0).collect();

        // reference deterministic network
        let lrelu = |v: f64| if v > 0.0 { v } else { 0.1 * v };
        let Layer::Conv(conv) = &net.layers[0] else {
            panic!()
        };
        let mut h1 = vec![0.0; 2 * 16];
        for co in 0..2 {
            for oy in 0..4 {
                for ox in 0..4 {
                    let mut s = wmean(2 * 9 + co);
                    for ky in 0..3 {
                        for kx in 0..3 {
                            let (iy, ix) =
                                (oy as isize + ky as isize - 1, ox as isize + kx as isize - 1);
                            if (0..4).contains(&iy) && (0..4).contains(&ix) {
                                s += wmean(conv.weight_index(co, 0, ky, kx))
                                    * x[(iy * 4 + ix) as usize];
                            }
                        }
                    }
                    h1[co * 16 + oy * 4 + ox] = lrelu(s);
                }
            }
        }
        let mut pooled = vec![f64::NEG_INFINITY; 8];
        for co in 0..2 {
            for y in 0..4 {
                for xx in 0..4 {
                    let o = co * 4 + (y / 2) * 2 + xx / 2;
                    pooled[o] = pooled[o].max(h1[co * 16 + y * 4 + xx]);
                }
            }
        }
        let dense = |inp: &[f64], out: usize| -> Vec<f64> {
            (0..out)
                .map(|o| {
                    let row = inp.len() + 1;
                    inp.iter()
                        .enumerate()
                        .map(|(k, v)| wmean(o * row + k) * v)
                        .sum::<f64>()
                        + wmean(o * row + inp.len())
                })
                .collect()
        };
        let h2: Vec<f64> = dense(&pooled, 3).into_iter().map(lrelu).collect();
        let logits = dense(&h2, 2);

        let mut st = net.new_example();
        let mut inc = Incidents::default();
        net.forward(&x, &mut st, &mut inc).unwrap();
        for (g, r) in st.up[7].iter().zip(&logits) {
            assert!((g.mean() - r).abs() < 1e-4, "{} {r}", g.mean());
        }
    }

    #[test]
    fn untrained_classifier_probabilities_sum_to_one() {
        let mut net = Network::new(&mlp(8, LayerSpec::Softmax)).unwrap();
        set_all(&mut net, |i| {
            Gaussian::from_moments(((i % 3) as f64 - 1.0) * 0.4, 0.7).unwrap()
        });
        for i in 0..1000 {
            let x = [(i as f64 * 0.37).sin() * 3.0, (i as f64 * 0.11).cos()];
            let Predictive::Classes(p) = net.predict(&x).unwrap() else {
                panic!()
            };
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn head_target_mismatch_is_an_error() {
        let mut net = Network::new(&mlp(2, LayerSpec::Softmax)).unwrap();
        let mut st = net.new_example();
        let mut inc = Incidents::default();
        net.forward(&[0.0, 0.0], &mut st, &mut inc).unwrap();
        assert!(net
            .backward(&[0.0, 0.0], Target::Value(1.0), &mut st, &mut inc)
            .is_err());
        assert!(net.forward(&[0.0], &mut st, &mut inc).is_err());
    }
}
