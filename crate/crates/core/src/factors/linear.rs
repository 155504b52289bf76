//! Weighted-sum, product and inner-product factors.
//!
//! The weighted sum is exact. The product uses the variational form of the
//! scalar product, which only needs the first two moments of each operand.
//! Backward messages are computed in natural parameters so that zero
//! coefficients and uniform downstream messages fall out as `G(0, 0)`.

use crate::error::{Error, Result};
use crate::factors::guard::FactorMessage;
use crate::gaussian::Gaussian;

/// Tolerance for moment consistency checks (`E[x^2] >= E[x]^2`).
const MOMENT_SLACK: f64 = 1e-12;

/// Density of `c^T v` for independent `v_i ~ N(means_i, vars_i)`.
pub fn weighted_sum_forward(coeffs: &[f64], means: &[f64], vars: &[f64]) -> Result<Gaussian> {
    if coeffs.is_empty() || coeffs.len() != means.len() || coeffs.len() != vars.len() {
        return Err(Error::Shape(format!(
            "weighted sum needs equal non-empty lengths, got {}/{}/{}",
            coeffs.len(),
            means.len(),
            vars.len()
        )));
    }
    let mut mean = 0.0;
    let mut var = 0.0;
    for ((&c, &m), &v) in coeffs.iter().zip(means).zip(vars) {
        if !(v >= 0.0) {
            return Err(Error::domain("addend variance", v));
        }
        mean += c * m;
        var += c * c * v;
    }
    Gaussian::from_moments(mean, var)
}

/// Message from `z = sum_i a_i v_i` back to addend `v_d`.
///
/// `fwd_mu`/`fwd_var` are the forward moments of the whole sum (including
/// addend `d`), `mu_d`/`var_d` the moments of the message from `v_d`.
pub fn weighted_sum_backward(
    a_d: f64,
    tau_z: f64,
    rho_z: f64,
    fwd_mu: f64,
    fwd_var: f64,
    mu_d: f64,
    var_d: f64,
) -> FactorMessage {
    if a_d == 0.0 || rho_z == 0.0 {
        return FactorMessage::exact(Gaussian::UNIFORM);
    }
    let denom = 1.0 + rho_z * (fwd_var - a_d * a_d * var_d);
    if !(denom > 1e-300) {
        return FactorMessage::uniform();
    }
    let msg = Gaussian::new(
        a_d * (tau_z - rho_z * (fwd_mu - a_d * mu_d)) / denom,
        a_d * a_d * rho_z / denom,
    );
    if msg.is_finite() {
        FactorMessage::exact(msg)
    } else {
        FactorMessage::uniform()
    }
}

fn check_moments(what: &'static str, e: f64, e2: f64) -> Result<()> {
    if !(e2 >= e * e - MOMENT_SLACK * e2.abs().max(1.0)) || !e.is_finite() || !e2.is_finite() {
        return Err(Error::domain(what, e2 - e * e));
    }
    Ok(())
}

/// Mean and variance of `a * b` from the first two moments of each factor.
#[inline]
pub fn product_moments(ea: f64, ea2: f64, eb: f64, eb2: f64) -> (f64, f64) {
    let m = ea * eb;
    (m, (ea2 * eb2 - m * m).max(0.0))
}

/// Forward message of the product factor `z = a * b`.
pub fn product_forward(ea: f64, ea2: f64, eb: f64, eb2: f64) -> Result<Gaussian> {
    check_moments("E[a^2] - E[a]^2", ea, ea2)?;
    check_moments("E[b^2] - E[b]^2", eb, eb2)?;
    let (m, v) = product_moments(ea, ea2, eb, eb2);
    Gaussian::from_moments(m, v)
}

/// Backward message of `z = a * b` to `b`, given the other operand's moments.
#[inline]
pub fn product_backward(tau_z: f64, rho_z: f64, ea: f64, ea2: f64) -> Gaussian {
    Gaussian::new(tau_z * ea, rho_z * ea2)
}

/// Forward message of the inner product `z = sum_i a_i b_i`.
pub fn inner_product_forward(ea: &[f64], ea2: &[f64], eb: &[f64], eb2: &[f64]) -> Result<Gaussian> {
    let n = ea.len();
    if n == 0 || ea2.len() != n || eb.len() != n || eb2.len() != n {
        return Err(Error::Shape(
            "inner product operands differ in length".into(),
        ));
    }
    let mut mean = 0.0;
    let mut var = 0.0;
    for i in 0..n {
        check_moments("E[a^2] - E[a]^2", ea[i], ea2[i])?;
        check_moments("E[b^2] - E[b]^2", eb[i], eb2[i])?;
        let (m, v) = product_moments(ea[i], ea2[i], eb[i], eb2[i]);
        mean += m;
        var += v;
    }
    Gaussian::from_moments(mean, var)
}

/// Shared part of the inner-product backward rule for one term.
///
/// Returns `(lead, r)` such that the message to either operand of the term
/// is `G(lead * E[partner], r * E[partner^2])`, or `None` when the effective
/// precision scale is not positive.
#[inline]
pub(crate) fn inner_coefficients(
    tau_z: f64,
    rho_z: f64,
    fwd_mu: f64,
    fwd_var: f64,
    term_mean: f64,
    term_var: f64,
) -> Option<(f64, f64)> {
    let scale = 1.0 + rho_z * (fwd_var - term_var);
    if !(scale > 0.0) {
        return None;
    }
    Some((
        (tau_z - rho_z * (fwd_mu - term_mean)) / scale,
        rho_z / scale,
    ))
}

/// Message from `z = sum_j a_j b_j` to `b_i`.
#[allow(clippy::too_many_arguments)]
pub fn inner_product_backward(
    i: usize,
    ea: &[f64],
    ea2: &[f64],
    eb: &[f64],
    eb2: &[f64],
    tau_z: f64,
    rho_z: f64,
    fwd_mu: f64,
    fwd_var: f64,
) -> Result<FactorMessage> {
    let n = ea.len();
    if i >= n || ea2.len() != n || eb.len() != n || eb2.len() != n {
        return Err(Error::Shape(format!(
            "index {i} out of range for {n} terms"
        )));
    }
    if rho_z == 0.0 {
        return Ok(FactorMessage::exact(Gaussian::UNIFORM));
    }
    let (tm, tv) = product_moments(ea[i], ea2[i], eb[i], eb2[i]);
    Ok(
        match inner_coefficients(tau_z, rho_z, fwd_mu, fwd_var, tm, tv)
            .map(|(lead, r)| Gaussian::new(lead * ea[i], r * ea2[i]))
        {
            Some(g) if g.is_finite() => FactorMessage::exact(g),
            _ => FactorMessage::uniform(),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factors::guard::Fallback;
    use factorbnn_oracle::{integrate_2d, normal_pdf, normal_stream, Running};

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn weighted_sum_forward_examples() {
        let g = weighted_sum_forward(&[1.0, 1.0], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(g.to_moments().unwrap(), (0.0, 2.0));
        let g = weighted_sum_forward(&[2.0], &[3.0], &[0.25]).unwrap();
        assert_eq!(g.to_moments().unwrap(), (6.0, 1.0));
        assert!(weighted_sum_forward(&[1.0], &[0.0, 1.0], &[1.0]).is_err());
    }

    #[test]
    fn weighted_sum_forward_vs_monte_carlo() {
        let c = [1.0, -1.0, 0.5];
        let mu = [0.3, -1.2, 2.0];
        let var = [0.7, 1.9, 0.4];
        let g = weighted_sum_forward(&c, &mu, &var).unwrap();
        let (m, v) = g.to_moments().unwrap();
        let mut z = normal_stream(11);
        let mut first = Running::default();
        let mut centered = Running::default();
        for _ in 0..10_000_000 {
            let s: f64 = (0..3).map(|i| c[i] * (mu[i] + var[i].sqrt() * z())).sum();
            first.push(s);
            centered.push((s - m) * (s - m));
        }
        assert!((first.mean() - m).abs() < 3.0 * first.std_error());
        assert!((centered.mean() - v).abs() < 3.0 * centered.std_error());
    }

    #[test]
    fn weighted_sum_backward_degenerate() {
        let r = weighted_sum_backward(0.0, 1.0, 2.0, 0.3, 1.0, 0.1, 0.5);
        assert_eq!(r.message, Gaussian::UNIFORM);
        let r = weighted_sum_backward(1.5, 0.0, 0.0, 0.3, 1.0, 0.1, 0.5);
        assert_eq!(r.message, Gaussian::UNIFORM);
        // inconsistent forward variance trips the denominator guard
        let r = weighted_sum_backward(1.0, 0.0, 10.0, 0.0, 0.0, 0.0, 1.0);
        assert_eq!(r.fallback, Fallback::Uniform);
    }

    #[test]
    fn weighted_sum_backward_vs_exact_conditional() {
        // z = 1.5 v1 - 0.7 v2, observe z through N(z; 0.4, 0.3)
        let (a1, a2) = (1.5, -0.7);
        let (m1, s1, m2, s2) = (0.2, 0.8, -0.5, 1.3);
        let (zy, zv) = (0.4, 0.3);
        let fwd_mu = a1 * m1 + a2 * m2;
        let fwd_var = a1 * a1 * s1 + a2 * a2 * s2;
        let msg = weighted_sum_backward(a1, zy / zv, 1.0 / zv, fwd_mu, fwd_var, m1, s1).message;
        // marginal of v1 = incoming * message; compare with 2-D quadrature
        let (pm, pv) = (msg * Gaussian::from_moments(m1, s1).unwrap())
            .to_moments()
            .unwrap();
        let joint = |x: f64, y: f64| {
            normal_pdf(x, m1, s1) * normal_pdf(y, m2, s2) * normal_pdf(a1 * x + a2 * y, zy, zv)
        };
        let b = (-12.0, 12.0);
        let z0 = integrate_2d(joint, b, b, 1e-11);
        let z1 = integrate_2d(|x, y| x * joint(x, y), b, b, 1e-11) / z0;
        let z2 = integrate_2d(|x, y| x * x * joint(x, y), b, b, 1e-11) / z0;
        assert!(approx(pm, z1, 1e-6), "{pm} {z1}");
        assert!(approx(pv, z2 - z1 * z1, 1e-6));
    }

    #[test]
    fn product_examples() {
        let g = product_forward(0.0, 1.0, 3.0, 10.0).unwrap();
        assert_eq!(g.to_moments().unwrap(), (0.0, 10.0));
        let g = product_forward(2.0, 4.0, 1.0, 2.0).unwrap();
        assert_eq!(g.to_moments().unwrap(), (2.0, 4.0));
        assert!(product_forward(2.0, 3.0, 1.0, 2.0).is_err());
        assert_eq!(product_backward(0.0, 0.0, 0.4, 1.0), Gaussian::UNIFORM);
        assert_eq!(
            product_backward(0.3, 0.9, 1.0, 1.0),
            Gaussian::new(0.3, 0.9)
        );
        assert_eq!(
            product_backward(1.0, 1.0, 2.0, 5.0),
            Gaussian::new(2.0, 5.0)
        );
    }

    #[test]
    fn product_forward_vs_monte_carlo() {
        let (ma, va, mb, vb) = (0.8, 0.5, -1.1, 0.3);
        let g = product_forward(ma, va + ma * ma, mb, vb + mb * mb).unwrap();
        let (m, v) = g.to_moments().unwrap();
        let mut z = normal_stream(5);
        let mut first = Running::default();
        let mut centered = Running::default();
        for _ in 0..10_000_000 {
            let p = (ma + va.sqrt() * z()) * (mb + vb.sqrt() * z());
            first.push(p);
            centered.push((p - m) * (p - m));
        }
        assert!((first.mean() - m).abs() < 3.0 * first.std_error());
        assert!((centered.mean() - v).abs() < 3.0 * centered.std_error());
    }

    #[test]
    fn inner_product_single_term_is_composition() {
        let (ea, ea2, eb, eb2) = (0.7, 0.9, -0.4, 0.5);
        let (tau_z, rho_z) = (0.6, 2.0);
        let (fm, fv) = product_moments(ea, ea2, eb, eb2);
        let direct = inner_product_backward(0, &[ea], &[ea2], &[eb], &[eb2], tau_z, rho_z, fm, fv)
            .unwrap()
            .message;
        // weighted sum with unit coefficient and a single addend: the sum
        // backward is the downstream message itself; then the product rule
        let ws = weighted_sum_backward(1.0, tau_z, rho_z, fm, fv, fm, fv).message;
        let composed = product_backward(ws.tau, ws.rho, ea, ea2);
        assert!(approx(direct.tau, composed.tau, 1e-15) && approx(direct.rho, composed.rho, 1e-15));
        let none =
            inner_product_backward(0, &[ea], &[ea2], &[eb], &[eb2], 0.0, 0.0, fm, fv).unwrap();
        assert_eq!(none.message, Gaussian::UNIFORM);
    }

    #[test]
    fn inner_product_matches_explicit_composition() {
        let ea = [0.5, -1.2, 0.3];
        let va = [0.2, 0.4, 1.0];
        let eb = [1.1, 0.2, -0.7];
        let vb = [0.6, 0.1, 0.3];
        let ea2: Vec<f64> = ea.iter().zip(&va).map(|(m, v)| v + m * m).collect();
        let eb2: Vec<f64> = eb.iter().zip(&vb).map(|(m, v)| v + m * m).collect();
        let fwd = inner_product_forward(&ea, &ea2, &eb, &eb2).unwrap();
        let (fm, fv) = fwd.to_moments().unwrap();
        let (tau_z, rho_z) = (-0.4, 1.7);
        for i in 0..3 {
            let direct = inner_product_backward(i, &ea, &ea2, &eb, &eb2, tau_z, rho_z, fm, fv)
                .unwrap()
                .message;
            // route through p_i = a_i b_i explicitly
            let (pm, pv) = product_moments(ea[i], ea2[i], eb[i], eb2[i]);
            let to_p = weighted_sum_backward(1.0, tau_z, rho_z, fm, fv, pm, pv).message;
            let composed = product_backward(to_p.tau, to_p.rho, ea[i], ea2[i]);
            assert!(approx(direct.tau, composed.tau, 1e-12));
            assert!(approx(direct.rho, composed.rho, 1e-12));
        }
    }
}
