//! Standard-normal functions and the half-line integrals that the message
//! equations are built from.
//!
//! The truncated-moment quantities are evaluated in a scaled form
//! `exp(ln_scale) * value` so that far tails neither underflow early nor lose
//! their leading digits to cancellation. For standardized arguments below
//! [`TAIL_SWITCH`] the Mills-ratio continued fraction replaces the direct
//! `sigma * phi(x) + mu * Phi(x)` expression.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::erfc;

use crate::error::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const TAIL_SWITCH: f64 = 4.0;
const CF_DEPTH: u32 = 200;

#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

#[inline]
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// `ln N(x; mean, var)`.
#[inline]
pub fn ln_normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * d * d / var - 0.5 * (2.0 * PI * var).ln()
}

/// `N(x; mean, var)`.
#[inline]
pub fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    ln_normal_pdf(x, mean, var).exp()
}

/// Scaled truncated moments `E[1{Z > 0} Z^k]`, k = 0, 1, 2, of `Z ~ N(mu, sigma2)`.
///
/// The true values are `exp(ln_scale) * moments[k]`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Truncated {
    pub ln_scale: f64,
    pub moments: [f64; 3],
}

impl Truncated {
    pub(crate) fn new(mu: f64, sigma2: f64) -> Truncated {
        let sigma = sigma2.sqrt();
        let x = mu / sigma;
        if x >= -TAIL_SWITCH {
            let pdf = std_normal_pdf(x);
            let cdf = std_normal_cdf(x);
            Truncated {
                ln_scale: 0.0,
                moments: [
                    cdf,
                    sigma * pdf + mu * cdf,
                    sigma * mu * pdf + (sigma2 + mu * mu) * cdf,
                ],
            }
        } else {
            // Mills ratio R(t) = Phi(-t)/phi(t) = 1/c1, c_k = t + k/c_{k+1}.
            // Then E[ReLU]/sigma = phi(t)/(c1 c2) and E[ReLU^2]/sigma^2 = 2 phi(t)/(c1 c2 c3).
            let t = -x;
            let mut next = t;
            let (mut c1, mut c2, mut c3) = (t, t, t);
            for k in (1..=CF_DEPTH).rev() {
                let ck = t + k as f64 / next;
                match k {
                    1 => c1 = ck,
                    2 => c2 = ck,
                    3 => c3 = ck,
                    _ => {}
                }
                next = ck;
            }
            Truncated {
                ln_scale: -0.5 * t * t - LN_SQRT_2PI,
                moments: [1.0 / c1, sigma / (c1 * c2), 2.0 * sigma2 / (c1 * c2 * c3)],
            }
        }
    }

    #[inline]
    pub(crate) fn value(&self, k: usize) -> f64 {
        self.moments[k] * self.ln_scale.exp()
    }
}

fn check_order(k: usize, allowed: std::ops::RangeInclusive<usize>) -> Result<()> {
    if allowed.contains(&k) {
        Ok(())
    } else {
        Err(Error::domain("moment order", k as f64))
    }
}

fn check_var(what: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(what, v))
    }
}

/// `E[ReLU(Z)^k]` for `Z ~ N(mu, sigma2)` and `k` in {1, 2}.
pub fn relu_moment(k: usize, mu: f64, sigma2: f64) -> Result<f64> {
    check_order(k, 1..=2)?;
    check_var("sigma2", sigma2)?;
    Ok(Truncated::new(mu, sigma2).value(k))
}

/// Merged natural parameters of `N(mu1, v1) * N(mu2, v2)` as `(mean, var)`
/// together with `ln N(mu1; mu2, v1 + v2)`.
#[inline]
fn merge(mu1: f64, v1: f64, mu2: f64, v2: f64) -> (f64, f64, f64) {
    let rho = 1.0 / v1 + 1.0 / v2;
    let tau = mu1 / v1 + mu2 / v2;
    (tau / rho, 1.0 / rho, ln_normal_pdf(mu1, mu2, v1 + v2))
}

/// All three orders of
/// `zeta_k = int_0^inf z^k N(z; mu1, v1) N(z; mu2, v2) dz` at once.
pub fn zeta_all(mu1: f64, v1: f64, mu2: f64, v2: f64) -> Result<[f64; 3]> {
    check_var("sigma2_1", v1)?;
    check_var("sigma2_2", v2)?;
    Ok(zeta_unchecked(mu1, v1, mu2, v2))
}

#[inline]
pub(crate) fn zeta_unchecked(mu1: f64, v1: f64, mu2: f64, v2: f64) -> [f64; 3] {
    let (mu_m, v_m, ln_overlap) = merge(mu1, v1, mu2, v2);
    let tr = Truncated::new(mu_m, v_m);
    let s = (ln_overlap + tr.ln_scale).exp();
    [tr.moments[0] * s, tr.moments[1] * s, tr.moments[2] * s]
}

/// `int_0^inf z^k N(z; mu1, sigma2_1) N(z; mu2, sigma2_2) dz` for `k` in {0, 1, 2}.
pub fn zeta(k: usize, mu1: f64, sigma2_1: f64, mu2: f64, sigma2_2: f64) -> Result<f64> {
    check_order(k, 0..=2)?;
    Ok(zeta_all(mu1, sigma2_1, mu2, sigma2_2)?[k])
}

#[inline]
pub(crate) fn s_minus_unchecked(mu1: f64, v1: f64, mu2: f64, v2: f64) -> [f64; 3] {
    let tr = Truncated::new(-mu1, v1);
    let s = (ln_normal_pdf(0.0, mu2, v2) + tr.ln_scale).exp();
    [tr.moments[0] * s, -tr.moments[1] * s, tr.moments[2] * s]
}

/// `int_{-inf}^0 z^k N(z; mu1, sigma2_1) N(0; mu2, sigma2_2) dz` for `k` in {0, 1, 2}.
pub fn s_minus(k: usize, mu1: f64, sigma2_1: f64, mu2: f64, sigma2_2: f64) -> Result<f64> {
    check_order(k, 0..=2)?;
    check_var("sigma2_1", sigma2_1)?;
    check_var("sigma2_2", sigma2_2)?;
    Ok(s_minus_unchecked(mu1, sigma2_1, mu2, sigma2_2)[k])
}

/// Inverse of the standard normal CDF.
///
/// Acklam's rational approximation followed by one Halley refinement
/// against the erfc-based CDF.
pub fn std_normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    if p.is_nan() {
        return f64::NAN;
    }
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let lo = 0.02425;
    let x = if p < lo {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - lo {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    // Halley step; compare in whichever tail keeps the residual accurate
    let e = if x < 0.0 {
        std_normal_cdf(x) - p
    } else {
        (1.0 - p) - std_normal_cdf(-x)
    };
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}
