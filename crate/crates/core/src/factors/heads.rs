//! Output factors: Gaussian regression, softmax and argmax likelihoods.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::factors::guard::FactorMessage;
use crate::factors::hermite;
use crate::factors::linear::weighted_sum_backward;
use crate::gaussian::{Gaussian, MomentTriple};
use crate::normal::{std_normal_cdf, std_normal_pdf, Truncated};

/// Mass below which a softmax marginal or argmax truncation is abandoned.
const MIN_HEAD_MASS: f64 = 1e-12;
/// Below this standardized mean the truncated moments switch to the
/// continued-fraction form.
const TRUNC_TAIL: f64 = -4.0;

fn check_beta2(beta2: f64) -> Result<()> {
    if beta2 > 0.0 && beta2.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("beta2", beta2))
    }
}

/// Predictive density of `y = a + N(0, beta2)`.
pub fn regression_forward(mu_a: f64, var_a: f64, beta2: f64) -> Result<Gaussian> {
    check_beta2(beta2)?;
    Gaussian::from_moments(mu_a, var_a + beta2)
}

/// Message to `a` from an observed target, or `G(0, 0)` when unobserved.
pub fn regression_backward(y: Option<f64>, beta2: f64) -> Result<Gaussian> {
    check_beta2(beta2)?;
    match y {
        Some(y) => Gaussian::from_moments(y, beta2),
        None => Ok(Gaussian::UNIFORM),
    }
}

fn check_logits(mus: &[f64], vars: &[f64]) -> Result<()> {
    if mus.is_empty() || mus.len() != vars.len() {
        return Err(Error::Shape(format!(
            "logit means/variances have lengths {}/{}",
            mus.len(),
            vars.len()
        )));
    }
    if let Some(&v) = vars.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::domain("logit variance", v));
    }
    Ok(())
}

/// Probit-scaled logit `mu / sqrt(1 + pi/8 var)`.
#[inline]
fn probit_logit(mu: f64, var: f64) -> f64 {
    mu / (1.0 + PI / 8.0 * var).sqrt()
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Class probabilities under the probit approximation of `E[softmax(a)]`.
pub fn softmax_probs(mus: &[f64], vars: &[f64]) -> Result<Vec<f64>> {
    check_logits(mus, vars)?;
    let t: Vec<f64> = mus
        .iter()
        .zip(vars)
        .map(|(&m, &v)| probit_logit(m, v))
        .collect();
    let lse = log_sum_exp(t.iter().copied());
    Ok(t.iter().map(|x| (x - lse).exp()).collect())
}

/// Probability of class `i` under [`softmax_probs`].
pub fn softmax_forward(mus: &[f64], vars: &[f64], i: usize) -> Result<f64> {
    let p = softmax_probs(mus, vars)?;
    p.get(i)
        .copied()
        .ok_or_else(|| Error::Shape(format!("class {i} out of range for {} logits", p.len())))
}

/// Message from the softmax likelihood of class `c` to logit `d`.
///
/// The other logits enter through their probit-scaled means. The marginal
/// of `a_d` is integrated with Gauss-Hermite quadrature, matched, and
/// divided by `N(mus[d], vars[d])`.
pub fn softmax_backward(c: usize, d: usize, mus: &[f64], vars: &[f64]) -> Result<FactorMessage> {
    check_logits(mus, vars)?;
    let n = mus.len();
    if c >= n || d >= n {
        return Err(Error::Shape(format!(
            "class {c} / logit {d} out of range for {n}"
        )));
    }
    let (mu, var) = (mus[d], vars[d]);
    if !(var > 0.0 && var.is_finite()) {
        return Ok(FactorMessage::uniform());
    }
    let others: Vec<f64> = (0..n)
        .filter(|&j| j != d)
        .map(|j| probit_logit(mus[j], vars[j]))
        .collect();
    let lse_others = log_sum_exp(others.iter().copied());
    let t_c = if c == d {
        0.0
    } else {
        probit_logit(mus[c], vars[c])
    };
    // log softmax(t_{-d}, a)_c
    let log_lik = |a: f64| {
        let lse = if lse_others.is_finite() {
            let m = a.max(lse_others);
            m + ((a - m).exp() + (lse_others - m).exp()).ln()
        } else {
            a
        };
        if c == d {
            a - lse
        } else {
            t_c - lse
        }
    };

    let (nodes, weights) = hermite::rule();
    let scale = (2.0 * var).sqrt();
    let mut lik = [0.0; hermite::ORDER];
    let mut m0 = 0.0;
    let mut m1 = 0.0;
    for i in 0..hermite::ORDER {
        let a = mu + scale * nodes[i];
        lik[i] = weights[i] * log_lik(a).exp();
        m0 += lik[i];
        m1 += lik[i] * (a - mu);
    }
    m0 /= PI.sqrt();
    if !(m0 > MIN_HEAD_MASS) {
        return Ok(FactorMessage::uniform());
    }
    let shift = m1 / PI.sqrt() / m0;
    let mut c2 = 0.0;
    for i in 0..hermite::ORDER {
        let dev = scale * nodes[i] - shift;
        c2 += lik[i] * dev * dev;
    }
    let marg_var = c2 / PI.sqrt() / m0;
    let marginal = match Gaussian::from_moments(mu + shift, marg_var) {
        Ok(g) => g,
        Err(_) => return Ok(FactorMessage::uniform()),
    };
    let msg = marginal / Gaussian::from_moments(mu, var)?;
    Ok(if msg.is_finite() && msg.rho >= 0.0 {
        FactorMessage::exact(msg)
    } else {
        FactorMessage::uniform()
    })
}

/// `Pr[a_c >= a_d]` for every `d != c`, multiplied together.
pub fn argmax_forward(mus: &[f64], vars: &[f64], c: usize) -> Result<f64> {
    check_logits(mus, vars)?;
    if c >= mus.len() {
        return Err(Error::Shape(format!(
            "class {c} out of range for {}",
            mus.len()
        )));
    }
    Ok((0..mus.len())
        .filter(|&d| d != c)
        .map(|d| pairwise_win(mus[c], vars[c], mus[d], vars[d]))
        .product())
}

fn pairwise_win(mc: f64, vc: f64, md: f64, vd: f64) -> f64 {
    let s = (vc + vd).sqrt();
    if s > 0.0 {
        std_normal_cdf((mc - md) / s)
    } else if mc > md {
        1.0
    } else if mc < md {
        0.0
    } else {
        0.5
    }
}

/// [`argmax_forward`] over all classes, renormalized to sum to one.
pub fn argmax_probs(mus: &[f64], vars: &[f64]) -> Result<Vec<f64>> {
    let raw: Vec<f64> = (0..mus.len())
        .map(|c| argmax_forward(mus, vars, c))
        .collect::<Result<_>>()?;
    let total: f64 = raw.iter().sum();
    Ok(if total > 0.0 {
        raw.iter().map(|p| p / total).collect()
    } else {
        vec![1.0 / mus.len() as f64; mus.len()]
    })
}

/// Mean and variance of `N(mu, var)` truncated to `[0, inf)`.
pub fn truncated_mean_var(mu: f64, var: f64) -> (f64, f64) {
    let sd = var.sqrt();
    let x = mu / sd;
    if x >= TRUNC_TAIL {
        let lam = std_normal_pdf(x) / std_normal_cdf(x);
        (mu + sd * lam, var * (1.0 - lam * (lam + x)))
    } else {
        // moment ratios from the scaled form, free of the vanishing mass
        let t = Truncated::new(mu, var);
        let mean = t.moments[1] / t.moments[0];
        let second = t.moments[2] / t.moments[0];
        (mean, (second - mean * mean).max(var * 1e-300))
    }
}

/// Message from the half-line indicator `1{z >= 0}` to `z ~ N(mu, var)`.
fn truncation_message(mu: f64, var: f64) -> Gaussian {
    let sd = var.sqrt();
    let x = mu / sd;
    if x >= TRUNC_TAIL {
        let lam = std_normal_pdf(x) / std_normal_cdf(x);
        let r = lam * (lam + x);
        let denom = var * (1.0 - r);
        Gaussian::new((sd * lam + mu * r) / denom, r / denom)
    } else {
        let (m, v) = truncated_mean_var(mu, var);
        Gaussian::new(m / v - mu / var, 1.0 / v - 1.0 / var)
    }
}

/// Messages from the regularized argmax likelihood of class `c`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArgmaxMessages {
    /// One message per logit.
    pub messages: Vec<Gaussian>,
    /// Pairs dropped because their truncation mass was negligible.
    pub skipped: usize,
}

/// Backward messages of the argmax factor for observed class `c`.
///
/// Each pair `z_i = a_c - a_i` is truncated to `z_i >= 0`; the resulting
/// message is routed back through the difference. With `gamma` set, pair
/// messages are damped by their misclassification probability
/// `Pr[a_i > a_c]` (natural parameters scaled, so confident pairs carry
/// little information) and a one-hot regression term `N(a; +-1, gamma^2)`
/// is mixed in for every logit.
pub fn argmax_backward(
    c: usize,
    mus: &[f64],
    vars: &[f64],
    gamma: Option<f64>,
) -> Result<ArgmaxMessages> {
    check_logits(mus, vars)?;
    let n = mus.len();
    if c >= n {
        return Err(Error::Shape(format!("class {c} out of range for {n}")));
    }
    let mut messages = vec![Gaussian::UNIFORM; n];
    if let Some(gamma) = gamma {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::domain("gamma", gamma));
        }
        let g2 = gamma * gamma;
        messages.fill(Gaussian::new(-1.0 / g2, 1.0 / g2));
        messages[c] = Gaussian::new(1.0 / g2, 1.0 / g2);
    }
    let mut skipped = 0;
    for i in (0..n).filter(|&i| i != c) {
        let mu = mus[c] - mus[i];
        let var = vars[c] + vars[i];
        if !(var > 0.0) {
            continue;
        }
        let x = mu / var.sqrt();
        if std_normal_cdf(x) < MIN_HEAD_MASS {
            skipped += 1;
            continue;
        }
        let tz = truncation_message(mu, var);
        let p = if gamma.is_some() {
            std_normal_cdf(-x)
        } else {
            1.0
        };
        let to_i = weighted_sum_backward(-1.0, tz.tau, tz.rho, mu, var, mus[i], vars[i]);
        let to_c = weighted_sum_backward(1.0, tz.tau, tz.rho, mu, var, mus[c], vars[c]);
        if to_i.fired() || to_c.fired() {
            skipped += 1;
            continue;
        }
        messages[i] *= to_i.message.scale(p);
        messages[c] *= to_c.message.scale(p);
    }
    Ok(ArgmaxMessages { messages, skipped })
}

/// Moments of the truncated difference, exposed for testing the pair step.
pub fn argmax_pair_moments(c: usize, i: usize, mus: &[f64], vars: &[f64]) -> MomentTriple {
    let t = Truncated::new(mus[c] - mus[i], vars[c] + vars[i]);
    MomentTriple::new(t.value(0), t.value(1), t.value(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factors::guard::Fallback;
    use factorbnn_oracle::{integrate, normal_pdf, normal_stream};

    #[test]
    fn regression_examples() {
        let g = regression_forward(0.0, 1.0, 0.0025).unwrap();
        let (m, v) = g.to_moments().unwrap();
        assert_eq!(m, 0.0);
        assert!((v - 1.0025).abs() < 1e-15);
        let b = regression_backward(Some(0.3), 0.0025).unwrap();
        assert!((b.tau - 120.0).abs() < 1e-12 && (b.rho - 400.0).abs() < 1e-12);
        assert_eq!(
            regression_backward(None, 0.0025).unwrap(),
            Gaussian::UNIFORM
        );
        assert!(regression_forward(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn softmax_forward_limits() {
        let p = softmax_probs(&[1.0, 2.0, 0.5], &[0.0; 3]).unwrap();
        let z: f64 = [1.0f64, 2.0, 0.5].iter().map(|x| x.exp()).sum();
        assert!((p[1] - 2.0f64.exp() / z).abs() < 1e-15);
        let p = softmax_probs(&[0.3; 4], &[2.0; 4]).unwrap();
        assert!(p.iter().all(|x| (x - 0.25).abs() < 1e-15));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn softmax_forward_probit_vs_monte_carlo() {
        let t1 = 1.0 / (1.0 + PI / 2.0).sqrt();
        let expect = t1.exp() / (t1.exp() + 1.0);
        let p = softmax_forward(&[1.0, 0.0], &[4.0, 0.0], 0).unwrap();
        assert!((p - expect).abs() < 1e-15);
        let mut z = normal_stream(21);
        let mut acc = 0.0;
        let n = 10_000_000;
        for _ in 0..n {
            let a = 1.0 + 2.0 * z();
            acc += 1.0 / (1.0 + (-a).exp());
        }
        assert!((acc / n as f64 - p).abs() < 0.02);
    }

    fn softmax_oracle(c: usize, d: usize, mus: &[f64], vars: &[f64]) -> (f64, f64) {
        let t: Vec<f64> = mus
            .iter()
            .zip(vars)
            .map(|(&m, &v)| m / (1.0 + PI / 8.0 * v).sqrt())
            .collect();
        let lik = |a: f64| {
            let mut tt = t.clone();
            tt[d] = a;
            let z: f64 = tt.iter().map(|x| x.exp()).sum();
            tt[c].exp() / z
        };
        let (mu, var) = (mus[d], vars[d]);
        let sd = var.sqrt();
        let f = |a: f64| normal_pdf(a, mu, var) * lik(a);
        let (lo, hi) = (mu - 20.0 * sd, mu + 20.0 * sd);
        let m0 = integrate(f, lo, hi, 1e-10 * 1e-3);
        let m1 = integrate(|a| a * f(a), lo, hi, 1e-13) / m0;
        let m2 = integrate(|a| (a - m1) * (a - m1) * f(a), lo, hi, 1e-13) / m0;
        (m1, m2)
    }

    #[test]
    fn softmax_backward_vs_adaptive_quadrature() {
        let mus = [0.4, -1.1, 0.9];
        let vars = [0.8, 2.5, 0.3];
        for c in 0..3 {
            for d in 0..3 {
                let r = softmax_backward(c, d, &mus, &vars).unwrap();
                assert_eq!(r.fallback, Fallback::None);
                let incoming = Gaussian::from_moments(mus[d], vars[d]).unwrap();
                let (m, v) = (incoming * r.message).to_moments().unwrap();
                let (qm, qv) = softmax_oracle(c, d, &mus, &vars);
                assert!(
                    (m - qm).abs() <= 1e-6 * qm.abs().max(1e-3),
                    "{c}{d}: {m} {qm}"
                );
                assert!((v - qv).abs() <= 1e-6 * qv, "{c}{d}: {v} {qv}");
            }
        }
    }

    #[test]
    fn softmax_backward_direction_and_symmetry() {
        let mus = [-4.0, 1.0, 1.0];
        let vars = [1.0; 3];
        let r = softmax_backward(0, 0, &mus, &vars).unwrap().message;
        assert!(r.tau > 0.0, "{r}");
        let sym = [0.0; 3];
        let a = softmax_backward(0, 1, &sym, &vars).unwrap().message;
        let b = softmax_backward(0, 2, &sym, &vars).unwrap().message;
        assert_eq!(a, b);
        let bad = softmax_backward(0, 1, &sym, &[1.0, f64::INFINITY, 1.0]).unwrap();
        assert_eq!(bad.fallback, Fallback::Uniform);
    }

    #[test]
    fn argmax_forward_examples() {
        assert!((argmax_forward(&[0.3, 0.3], &[1.0, 1.0], 0).unwrap() - 0.5).abs() < 1e-15);
        assert!(argmax_forward(&[40.0, 0.0], &[1.0, 1.0], 0).unwrap() > 1.0 - 1e-15);
        let mus = [1.0, 0.0, -0.5];
        let vars: [f64; 3] = [0.3, 0.3, 0.3];
        let mut z = normal_stream(8);
        let n = 10_000_000;
        let mut wins = [0usize; 3];
        for _ in 0..n {
            let s: Vec<f64> = (0..3).map(|i| mus[i] + vars[i].sqrt() * z()).collect();
            let best = (0..3).max_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap();
            wins[best] += 1;
        }
        for c in 0..3 {
            let p = argmax_forward(&mus, &vars, c).unwrap();
            assert!((p - wins[c] as f64 / n as f64).abs() < 0.03, "{c}");
        }
        let p = argmax_probs(&mus, &vars).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn truncated_moments_half_normal() {
        let s2 = 1.7;
        let (m, v) = truncated_mean_var(0.0, s2);
        assert!((m - (s2 * 2.0 / PI).sqrt()).abs() < 1e-14);
        assert!((v - s2 * (1.0 - 2.0 / PI)).abs() < 1e-14);
        let mt = argmax_pair_moments(0, 1, &[0.2, 0.2], &[0.85, 0.85]);
        let (m2, v2) = mt.mean_var().unwrap();
        assert!((m2 - m).abs() < 1e-14 && (v2 - v).abs() < 1e-14);
    }

    #[test]
    fn truncation_pair_moments_vs_quadrature() {
        let mus = [0.3, 1.2, -0.8];
        let vars = [0.5, 0.9, 1.4];
        for i in 1..3 {
            let (mu, var) = (mus[0] - mus[i], vars[0] + vars[i]);
            let mt = argmax_pair_moments(0, i, &mus, &vars);
            let hi = mu + 30.0 * var.sqrt();
            for (k, got) in [mt.m0, mt.m1, mt.m2].into_iter().enumerate() {
                let q = integrate(
                    |z| z.powi(k as i32) * normal_pdf(z, mu, var),
                    0.0,
                    hi,
                    1e-14,
                );
                assert!((got - q).abs() < 1e-8);
            }
            let (tm, tv) = truncated_mean_var(mu, var);
            let msg = truncation_message(mu, var);
            let (gm, gv) = (msg * Gaussian::from_moments(mu, var).unwrap())
                .to_moments()
                .unwrap();
            assert!((gm - tm).abs() < 1e-12 && (gv - tv).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_tail_branch_is_continuous() {
        let var: f64 = 2.0;
        let edge = TRUNC_TAIL * var.sqrt();
        let a = truncation_message(edge + 1e-9, var);
        let b = truncation_message(edge - 1e-9, var);
        assert!((a.tau - b.tau).abs() < 1e-6 * a.tau.abs());
        assert!((a.rho - b.rho).abs() < 1e-6 * a.rho);
        let deep = truncation_message(-30.0, 1.0);
        assert!(deep.is_finite() && deep.rho > 0.0);
    }

    #[test]
    fn argmax_backward_confident_is_one_hot() {
        let gamma = 0.5;
        let r = argmax_backward(0, &[30.0, 0.0, -1.0], &[1.0; 3], Some(gamma)).unwrap();
        let (m0, v0) = r.messages[0].to_moments().unwrap();
        assert!((m0 - 1.0).abs() < 1e-6 && (v0 - 0.25).abs() < 1e-6);
        for m in &r.messages[1..] {
            let (mi, vi) = m.to_moments().unwrap();
            assert!((mi + 1.0).abs() < 1e-6 && (vi - 0.25).abs() < 1e-6);
        }
    }

    #[test]
    fn argmax_backward_unregularized_is_pure_truncation() {
        let (mus, vars) = ([0.2, 0.5], [0.7, 0.4]);
        let r = argmax_backward(0, &mus, &vars, None).unwrap();
        // marginal of the difference must equal the truncated difference
        let (m, v) = truncated_mean_var(mus[0] - mus[1], vars[0] + vars[1]);
        let a0 = r.messages[0] * Gaussian::from_moments(mus[0], vars[0]).unwrap();
        let a1 = r.messages[1] * Gaussian::from_moments(mus[1], vars[1]).unwrap();
        let (m0, v0) = a0.to_moments().unwrap();
        let (m1, v1) = a1.to_moments().unwrap();
        assert!(((m0 - m1) - m).abs() < 1e-12);
        // the truncation shift splits in proportion to the prior variances
        let shift = m - (mus[0] - mus[1]);
        assert!(((m0 - mus[0]) - shift * vars[0] / (vars[0] + vars[1])).abs() < 1e-12);
        assert!(((mus[1] - m1) - shift * vars[1] / (vars[0] + vars[1])).abs() < 1e-12);
        assert!(v0 < vars[0] && v1 < vars[1] && v > 0.0);
    }

    #[test]
    fn argmax_backward_pushes_toward_label() {
        let r = argmax_backward(1, &[1.0, -1.0, 0.0], &[1.0; 3], Some(1.0)).unwrap();
        assert_eq!(r.skipped, 0);
        // without the regularizer the label logit would be pushed up, others down
        let plain = r.messages[1] / Gaussian::new(1.0, 1.0);
        assert!(plain.tau > 0.0);
        let other = r.messages[0] / Gaussian::new(-1.0, 1.0);
        assert!(other.tau < 0.0 && other.rho >= 0.0);
        let hopeless = argmax_backward(1, &[100.0, -100.0], &[1e-2, 1e-2], Some(1.0)).unwrap();
        assert_eq!(hopeless.skipped, 1);
        assert!(hopeless
            .messages
            .iter()
            .all(|m| m.is_finite() && m.rho > 0.0));
    }
}
