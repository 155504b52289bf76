use crate::gaussian::Gaussian;

/// Thresholds for the numerical guards around approximated messages.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GuardPolicy {
    /// Marginal mass below which a marginal-form forward message is abandoned.
    pub min_mass: f64,
    /// Precision threshold in the backward acceptance rule.
    pub min_backward_rho: f64,
    /// Accept a backward message only if `tau > 0 || rho > min_backward_rho`.
    pub require_tau_positive_or_rho: bool,
}

impl Default for GuardPolicy {
    fn default() -> Self {
        GuardPolicy {
            min_mass: 1e-8,
            min_backward_rho: 2e-8,
            require_tau_positive_or_rho: true,
        }
    }
}

impl GuardPolicy {
    /// Only the storability checks (finite, non-negative precision) remain.
    pub fn permissive() -> Self {
        GuardPolicy {
            min_mass: f64::MIN_POSITIVE,
            min_backward_rho: 0.0,
            require_tau_positive_or_rho: false,
        }
    }

    /// Acceptance rule for a backward activation message.
    pub fn accepts_backward(&self, msg: Gaussian) -> bool {
        storable(msg)
            && (!self.require_tau_positive_or_rho
                || msg.tau > 0.0
                || msg.rho > self.min_backward_rho)
    }
}

/// Finite with non-negative precision.
#[inline]
pub fn storable(msg: Gaussian) -> bool {
    msg.is_finite() && msg.rho >= 0.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fallback {
    None,
    Direct,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FactorMessage {
    pub message: Gaussian,
    pub fallback: Fallback,
}

impl FactorMessage {
    #[inline]
    pub fn exact(message: Gaussian) -> Self {
        FactorMessage {
            message,
            fallback: Fallback::None,
        }
    }

    #[inline]
    pub fn direct(message: Gaussian) -> Self {
        FactorMessage {
            message,
            fallback: Fallback::Direct,
        }
    }

    #[inline]
    pub fn uniform() -> Self {
        FactorMessage {
            message: Gaussian::UNIFORM,
            fallback: Fallback::Uniform,
        }
    }

    pub fn fired(&self) -> bool {
        self.fallback != Fallback::None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backward_rule() {
        let p = GuardPolicy::default();
        assert!(!p.accepts_backward(Gaussian::new(-1.0, 1e-9)));
        assert!(p.accepts_backward(Gaussian::new(1.0, 1e-9)));
        assert!(p.accepts_backward(Gaussian::new(-1.0, 1e-3)));
        assert!(!p.accepts_backward(Gaussian::new(1.0, -1e-3)));
        assert!(!p.accepts_backward(Gaussian::new(f64::NAN, 1.0)));
        assert!(GuardPolicy::permissive().accepts_backward(Gaussian::new(-1.0, 1e-9)));
    }
}
