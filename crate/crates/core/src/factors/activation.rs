//! LeakyReLU factor `a = LeakyReLU_alpha(z)`; `alpha = 0` is ReLU.
//!
//! `z` is the pre-activation, `a` the output. Forward messages go to `a`,
//! backward messages to `z`. Both directions have a direct form (moment
//! match the pushed-through density) and a marginal form (moment match the
//! product with the opposite message, then divide it back out).

use crate::error::{Error, Result};
use crate::factors::guard::{storable, FactorMessage, GuardPolicy};
use crate::gaussian::{Gaussian, MomentTriple};
use crate::normal::{s_minus_unchecked, zeta_unchecked, Truncated};

/// Variance floor relative to the input variance for near-degenerate outputs.
const REL_VAR_FLOOR: f64 = 1e-12;

/// Mean and variance of `LeakyReLU_alpha(Z)` for `Z ~ N(mu, var)`.
///
/// Written as `Z` plus a one-sided correction so the variance never comes
/// from cancelling two large second moments.
fn pushforward(alpha: f64, mu: f64, var: f64) -> (f64, f64) {
    let w = 1.0 - alpha;
    let (mean, v) = if mu >= 0.0 {
        // Y = Z + w N with N = ReLU(-Z) and Z N = -N^2
        let n = Truncated::new(-mu, var);
        let (e1, e2) = (n.value(1), n.value(2));
        (
            mu + w * e1,
            var + w * w * (e2 - e1 * e1) - 2.0 * w * (e2 + mu * e1),
        )
    } else {
        // Y = alpha Z + w P with P = ReLU(Z) and Z P = P^2
        let p = Truncated::new(mu, var);
        let (e1, e2) = (p.value(1), p.value(2));
        (
            alpha * mu + w * e1,
            alpha * alpha * var + w * w * (e2 - e1 * e1) + 2.0 * alpha * w * (e2 - mu * e1),
        )
    };
    (mean, v.max(REL_VAR_FLOOR * var))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha >= 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("alpha", alpha))
    }
}

/// Direct moment match of `LeakyReLU_alpha(N(mu_z, var_z))`.
///
/// ReLU (`alpha = 0`) is rejected: its forward density has a point mass and
/// should only be matched through the marginal form.
pub fn leakyrelu_forward_direct(alpha: f64, mu_z: f64, var_z: f64) -> Result<Gaussian> {
    check_alpha(alpha)?;
    if alpha == 0.0 {
        return Err(Error::domain(
            "alpha (direct forward needs alpha > 0)",
            alpha,
        ));
    }
    if !(var_z > 0.0 && var_z.is_finite()) || !mu_z.is_finite() {
        return Err(Error::domain("var_z", var_z));
    }
    let (m, v) = pushforward(alpha, mu_z, var_z);
    Gaussian::from_moments(m, v)
}

/// Unnormalized moments of the output marginal `msg_a_to_f(a) * p(a)`.
fn forward_marginal_moments(alpha: f64, mz: f64, vz: f64, ma: f64, va: f64) -> MomentTriple {
    let pos = zeta_unchecked(ma, va, mz, vz);
    let neg = if alpha > 0.0 {
        let n = zeta_unchecked(-ma, va, -alpha * mz, alpha * alpha * vz);
        [n[0], -n[1], n[2]]
    } else {
        // point mass Phi(-mu_z / sigma_z) at a = 0
        let mass = Truncated::new(-mz, vz).value(0);
        [mass * crate::normal::normal_pdf(0.0, ma, va), 0.0, 0.0]
    };
    MomentTriple::new(pos[0] + neg[0], pos[1] + neg[1], pos[2] + neg[2])
}

/// Marginal-form forward message to the output.
///
/// Falls back to the direct pushforward (flagged) when the marginal mass is
/// at most `policy.min_mass`, anything is non-finite, or the divided message
/// has negative precision, i.e. the fitted marginal is less precise than the
/// message it was multiplied with.
pub fn leakyrelu_forward_marginal(
    alpha: f64,
    msg_z: Gaussian,
    msg_a_to_f: Gaussian,
    policy: &GuardPolicy,
) -> Result<FactorMessage> {
    check_alpha(alpha)?;
    let (mz, vz) = msg_z.to_moments()?;
    let direct = || -> Result<Gaussian> {
        let (m, v) = pushforward(alpha, mz, vz);
        Gaussian::from_moments(m, v)
    };
    if !msg_a_to_f.is_proper() {
        return Ok(FactorMessage::exact(direct()?));
    }
    let (ma, va) = msg_a_to_f.to_moments()?;
    let mt = forward_marginal_moments(alpha, mz, vz, ma, va);
    let accepted = (mt.m0 > policy.min_mass)
        .then(|| mt.to_gaussian())
        .flatten()
        .map(|marginal| marginal / msg_a_to_f)
        .filter(|msg| storable(*msg));
    Ok(match accepted {
        Some(msg) => FactorMessage::exact(msg),
        None => FactorMessage::direct(direct()?),
    })
}

/// Unnormalized moments of `msg_z_to_f(z) * msg_a_to_f(LeakyReLU(z))`.
fn backward_marginal_moments(alpha: f64, mz: f64, vz: f64, ma: f64, va: f64) -> MomentTriple {
    let pos = zeta_unchecked(mz, vz, ma, va);
    let neg = if alpha > 0.0 {
        // N(alpha z; ma, va) = N(z; ma/alpha, va/alpha^2) / alpha
        let n = zeta_unchecked(-mz, vz, -ma / alpha, va / (alpha * alpha));
        [n[0] / alpha, -n[1] / alpha, n[2] / alpha]
    } else {
        s_minus_unchecked(mz, vz, ma, va)
    };
    MomentTriple::new(pos[0] + neg[0], pos[1] + neg[1], pos[2] + neg[2])
}

/// Moments of the (integrable for `alpha > 0`) function `msg_a(LeakyReLU(z))`.
fn backward_direct_moments(alpha: f64, ma: f64, va: f64) -> MomentTriple {
    let pos = Truncated::new(ma, va);
    let neg = Truncated::new(-ma / alpha, va / (alpha * alpha));
    MomentTriple::new(
        pos.value(0) + neg.value(0) / alpha,
        pos.value(1) - neg.value(1) / alpha,
        pos.value(2) + neg.value(2) / alpha,
    )
}

/// Backward message to the pre-activation.
///
/// Uses the marginal form when `msg_z_to_f` is proper. If it is uniform the
/// marginal is the message itself, which is only integrable for
/// `alpha > 0`; ReLU then returns `G(0, 0)` flagged as a fallback. Results
/// failing `policy.accepts_backward` are replaced by `G(0, 0)`.
pub fn leakyrelu_backward(
    alpha: f64,
    msg_z_to_f: Gaussian,
    msg_a: Gaussian,
    policy: &GuardPolicy,
) -> Result<FactorMessage> {
    check_alpha(alpha)?;
    if !msg_a.is_proper() {
        return Ok(FactorMessage::exact(Gaussian::UNIFORM));
    }
    let (ma, va) = msg_a.to_moments()?;
    let candidate = if msg_z_to_f.is_proper() {
        let (mz, vz) = msg_z_to_f.to_moments()?;
        backward_marginal_moments(alpha, mz, vz, ma, va)
            .to_gaussian()
            .map(|marginal| marginal / msg_z_to_f)
    } else if alpha > 0.0 {
        backward_direct_moments(alpha, ma, va).to_gaussian()
    } else {
        None
    };
    Ok(match candidate {
        Some(msg) if policy.accepts_backward(msg) => FactorMessage::exact(msg),
        _ => FactorMessage::uniform(),
    })
}
