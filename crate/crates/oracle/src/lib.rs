//! Independent numerical references for tests.
//!
//! Nothing in here shares code with the `factorbnn` crate: the routines are
//! plain adaptive quadrature, grid rules and Monte-Carlo estimators that the
//! test suites compare the closed-form message equations against.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod quadrature of `f` over `[a, b]`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate falls below `abs_tol` (or a few ulps of the running total, so
/// integrals of tiny magnitude still terminate) or the budget runs out.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
    struct Piece(f64, f64, f64, f64);
    impl PartialEq for Piece {
        fn eq(&self, o: &Self) -> bool {
            self.3.total_cmp(&o.3).is_eq()
        }
    }
    impl Eq for Piece {}
    impl PartialOrd for Piece {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Piece {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            self.3.total_cmp(&o.3)
        }
    }

    let mut heap = std::collections::BinaryHeap::new();
    // seed with a uniform split so narrow peaks are not missed entirely
    let seeds = 64;
    let step = (b - a) / seeds as f64;
    let (mut total, mut total_err) = (0.0, 0.0);
    for i in 0..seeds {
        let lo = a + step * i as f64;
        let hi = if i + 1 == seeds { b } else { lo + step };
        let (v, e) = kronrod(&f, lo, hi);
        total += v;
        total_err += e;
        heap.push(Piece(lo, hi, v, e));
    }
    for _ in 0..100_000 {
        if total_err <= abs_tol.max(8.0 * f64::EPSILON * total.abs()) {
            break;
        }
        let Piece(lo, hi, v, e) = heap.pop().unwrap();
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = kronrod(&f, lo, mid);
        let (v2, e2) = kronrod(&f, mid, hi);
        total += v1 + v2 - v;
        total_err += e1 + e2 - e;
        heap.push(Piece(lo, mid, v1, e1));
        heap.push(Piece(mid, hi, v2, e2));
    }
    // sum small-to-large for a little extra accuracy
    let mut vals: Vec<f64> = heap.iter().map(|p| p.2).collect();
    vals.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    vals.iter().sum()
}

/// Iterated adaptive quadrature over the rectangle `[ax, bx] x [ay, by]`.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    (ax, bx): (f64, f64),
    (ay, by): (f64, f64),
    abs_tol: f64,
) -> f64 {
    integrate(
        |x| integrate(|y| f(x, y), ay, by, abs_tol * 1e-2),
        ax,
        bx,
        abs_tol,
    )
}

/// Composite trapezoid rule on `n` equal panels.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for i in 1..n {
        s += f(a + h * i as f64);
    }
    s * h
}

/// Normal density written out directly, for use inside oracle integrands.
pub fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    (-0.5 * d * d / var).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// Zeroth, first and second raw moments of a non-negative weight function,
/// by adaptive quadrature over `[a, b]`.
pub fn raw_moments<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> [f64; 3] {
    [
        integrate(&f, a, b, abs_tol),
        integrate(|x| x * f(x), a, b, abs_tol),
        integrate(|x| x * x * f(x), a, b, abs_tol),
    ]
}

/// Running mean/variance accumulator (Welford).
#[derive(Debug, Default, Clone, Copy)]
pub struct Running {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Running {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.m2 / (self.n - 1) as f64
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

/// Monte-Carlo moments of `g(Z)` for `Z ~ N(mean, var)`.
///
/// Returns accumulators for `g` and `g^2` so callers can check both the mean
/// and the second moment against a standard-error bound.
pub fn mc_transform<G: Fn(f64) -> f64>(
    g: G,
    mean: f64,
    var: f64,
    samples: usize,
    seed: u64,
) -> (Running, Running) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = var.sqrt();
    let mut first = Running::default();
    let mut second = Running::default();
    for _ in 0..samples {
        let z: f64 = StandardNormal.sample(&mut rng);
        let v = g(mean + sd * z);
        first.push(v);
        second.push(v * v);
    }
    (first, second)
}

/// Draws standard normal samples from a seeded stream.
pub fn normal_stream(seed: u64) -> impl FnMut() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    move || StandardNormal.sample(&mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_gaussian_mass() {
        let v = integrate(|x| normal_pdf(x, 0.3, 2.0), -40.0, 40.0, 1e-13);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn integrates_polynomial_exactly() {
        let v = integrate(|x| x * x * x - 2.0 * x, 0.0, 3.0, 1e-14);
        assert!((v - (81.0 / 4.0 - 9.0)).abs() < 1e-12);
    }

    #[test]
    fn two_dimensional_mass() {
        let v = integrate_2d(
            |x, y| normal_pdf(x, 0.0, 1.0) * normal_pdf(y, 1.0, 0.5),
            (-12.0, 12.0),
            (-12.0, 12.0),
            1e-10,
        );
        assert!((v - 1.0).abs() < 1e-9);
    }
}
