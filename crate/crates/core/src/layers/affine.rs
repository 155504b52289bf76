//! Linear and convolutional layers.
//!
//! Both are banks of inner-product factors: output `o` is
//! `sum_t w[wi(t)] * x[xi(t)] (+ b_o)`. A convolution reuses the same weight
//! index at every spatial position, so its per-example weight message is the
//! natural-parameter sum over positions.

use crate::factors::linear::inner_coefficients;
use crate::gaussian::Gaussian;
use crate::layers::weights::WeightStore;

/// Variance floor for affine outputs whose inputs and weights are all
/// (numerically) deterministic.
pub(crate) const OUT_VAR_FLOOR: f64 = 1e-300;

/// First and second raw moments of a vector of scalar variables.
#[derive(Clone, Debug, Default)]
pub(crate) struct Moments {
    pub e: Vec<f64>,
    pub e2: Vec<f64>,
}

impl Moments {
    pub fn observed(x: &[f64]) -> Self {
        Moments {
            e: x.to_vec(),
            e2: x.iter().map(|v| v * v).collect(),
        }
    }

    pub fn of(gs: impl Iterator<Item = Gaussian>) -> Self {
        let (e, e2) = gs.map(|g| g.raw_moments()).unzip();
        Moments { e, e2 }
    }
}

/// How outputs of an affine layer connect to weights and inputs.
pub(crate) trait Wiring {
    fn n_out(&self) -> usize;
    /// Calls `f(weight_index, input_index)` for every term of output `o`.
    fn terms(&self, o: usize, f: impl FnMut(usize, usize));
    fn bias(&self, o: usize) -> Option<usize>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct Linear {
    pub d_in: usize,
    pub d_out: usize,
    pub bias: bool,
    pub weights: WeightStore,
}

impl Linear {
    pub fn new(d_in: usize, d_out: usize, bias: bool) -> Self {
        Linear {
            d_in,
            d_out,
            bias,
            weights: WeightStore::new(d_out * (d_in + bias as usize)),
        }
    }

    #[inline]
    pub fn weight_index(&self, o: usize, k: usize) -> usize {
        o * (self.d_in + self.bias as usize) + k
    }

    pub fn is_bias(&self, index: usize) -> bool {
        self.bias && index % (self.d_in + 1) == self.d_in
    }
}

impl Wiring for Linear {
    fn n_out(&self) -> usize {
        self.d_out
    }

    #[inline]
    fn terms(&self, o: usize, mut f: impl FnMut(usize, usize)) {
        let base = self.weight_index(o, 0);
        for k in 0..self.d_in {
            f(base + k, k);
        }
    }

    #[inline]
    fn bias(&self, o: usize) -> Option<usize> {
        self.bias.then(|| self.weight_index(o, self.d_in))
    }
}

/// Convolution with square kernels, stride 1 and zero padding. The padded
/// border is a constant zero and contributes nothing.
#[derive(Clone, Debug, PartialEq)]
pub struct Conv {
    pub c_in: usize,
    pub c_out: usize,
    pub kernel: usize,
    pub padding: usize,
    pub in_h: usize,
    pub in_w: usize,
    pub weights: WeightStore,
}

impl Conv {
    pub fn new(in_shape: [usize; 3], c_out: usize, kernel: usize, padding: usize) -> Self {
        let [c_in, in_h, in_w] = in_shape;
        Conv {
            c_in,
            c_out,
            kernel,
            padding,
            in_h,
            in_w,
            weights: WeightStore::new(c_out * c_in * kernel * kernel + c_out),
        }
    }

    pub fn out_h(&self) -> usize {
        self.in_h + 2 * self.padding + 1 - self.kernel
    }

    pub fn out_w(&self) -> usize {
        self.in_w + 2 * self.padding + 1 - self.kernel
    }

    #[inline]
    pub fn weight_index(&self, co: usize, ci: usize, ky: usize, kx: usize) -> usize {
        ((co * self.c_in + ci) * self.kernel + ky) * self.kernel + kx
    }

    /// Kernel fan-in `c_in * k^2`.
    pub fn fan_in(&self) -> usize {
        self.c_in * self.kernel * self.kernel
    }

    pub fn is_bias(&self, index: usize) -> bool {
        index >= self.c_out * self.fan_in()
    }
}

impl Wiring for Conv {
    fn n_out(&self) -> usize {
        self.c_out * self.out_h() * self.out_w()
    }

    #[inline]
    fn terms(&self, o: usize, mut f: impl FnMut(usize, usize)) {
        let (oh, ow) = (self.out_h(), self.out_w());
        let co = o / (oh * ow);
        let oy = (o / ow) % oh;
        let ox = o % ow;
        for ci in 0..self.c_in {
            for ky in 0..self.kernel {
                let iy = (oy + ky).wrapping_sub(self.padding);
                if iy >= self.in_h {
                    continue;
                }
                for kx in 0..self.kernel {
                    let ix = (ox + kx).wrapping_sub(self.padding);
                    if ix >= self.in_w {
                        continue;
                    }
                    f(
                        self.weight_index(co, ci, ky, kx),
                        (ci * self.in_h + iy) * self.in_w + ix,
                    );
                }
            }
        }
    }

    #[inline]
    fn bias(&self, o: usize) -> Option<usize> {
        let co = o / (self.out_h() * self.out_w());
        Some(self.c_out * self.fan_in() + co)
    }
}

/// Mean and variance of output `o`.
#[inline]
fn output_moments<W: Wiring>(wiring: &W, o: usize, w: &Moments, x: &Moments) -> (f64, f64) {
    let mut mean = 0.0;
    let mut var = 0.0;
    wiring.terms(o, |wi, xi| {
        let m = w.e[wi] * x.e[xi];
        mean += m;
        var += (w.e2[wi] * x.e2[xi] - m * m).max(0.0);
    });
    if let Some(b) = wiring.bias(o) {
        mean += w.e[b];
        var += (w.e2[b] - w.e[b] * w.e[b]).max(0.0);
    }
    (mean, var)
}

/// Forward messages of every output.
pub(crate) fn forward<W: Wiring>(wiring: &W, w: &Moments, x: &Moments) -> Vec<Gaussian> {
    (0..wiring.n_out())
        .map(|o| {
            let (mean, var) = output_moments(wiring, o, w, x);
            let var = var.max(OUT_VAR_FLOOR);
            Gaussian::new(mean / var, 1.0 / var)
        })
        .collect()
}

/// Backward messages for one example.
///
/// Accumulates factor-to-weight messages into `to_w` and, unless the input
/// is observed, factor-to-input messages into `to_x`; both must start at
/// `G(0, 0)`. Returns the number of terms dropped by the scale guard.
pub(crate) fn backward<W: Wiring>(
    wiring: &W,
    w: &Moments,
    x: &Moments,
    down: &[Gaussian],
    to_w: &mut [Gaussian],
    mut to_x: Option<&mut [Gaussian]>,
) -> u64 {
    let mut dropped = 0;
    for (o, dz) in down.iter().enumerate() {
        if dz.rho == 0.0 {
            continue;
        }
        let (mean, var) = output_moments(wiring, o, w, x);
        wiring.terms(o, |wi, xi| {
            let tm = w.e[wi] * x.e[xi];
            let tv = (w.e2[wi] * x.e2[xi] - tm * tm).max(0.0);
            match inner_coefficients(dz.tau, dz.rho, mean, var, tm, tv) {
                Some((lead, r)) => {
                    let g = &mut to_w[wi];
                    g.tau += lead * x.e[xi];
                    g.rho += r * x.e2[xi];
                    if let Some(tx) = to_x.as_deref_mut() {
                        tx[xi].tau += lead * w.e[wi];
                        tx[xi].rho += r * w.e2[wi];
                    }
                }
                None => dropped += 1,
            }
        });
        if let Some(b) = wiring.bias(o) {
            let tv = (w.e2[b] - w.e[b] * w.e[b]).max(0.0);
            match inner_coefficients(dz.tau, dz.rho, mean, var, w.e[b], tv) {
                Some((lead, r)) => {
                    to_w[b].tau += lead;
                    to_w[b].rho += r;
                }
                None => dropped += 1,
            }
        }
    }
    dropped
}
