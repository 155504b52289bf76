//! Scalar Gaussians in natural parameters.
//!
//! Every message and marginal in the engine is a [`Gaussian`] stored as its
//! precision-mean `tau = mu / sigma^2` and precision `rho = 1 / sigma^2`.
//! Multiplying two densities adds their natural parameters and dividing
//! subtracts them; the scalar normalization constant of the product is
//! dropped because marginals are always renormalized. `Gaussian::UNIFORM`
//! (`tau = rho = 0`) is the flat "no information" message and the identity
//! of both operations.

use std::fmt;
use std::ops::{Div, DivAssign, Mul, MulAssign};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Gaussian {
    pub tau: f64,
    pub rho: f64,
}

impl Gaussian {
    pub const UNIFORM: Gaussian = Gaussian { tau: 0.0, rho: 0.0 };

    pub const fn new(tau: f64, rho: f64) -> Self {
        Gaussian { tau, rho }
    }

    /// Builds `N(mean, var)` in natural parameters. Fails for `var <= 0`.
    pub fn from_moments(mean: f64, var: f64) -> Result<Self> {
        if !(var > 0.0) || !var.is_finite() {
            return Err(Error::domain("variance", var));
        }
        if !mean.is_finite() {
            return Err(Error::domain("mean", mean));
        }
        Ok(Gaussian {
            tau: mean / var,
            rho: 1.0 / var,
        })
    }

    /// Mean and variance. Fails unless `rho > 0`.
    pub fn to_moments(self) -> Result<(f64, f64)> {
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::domain("precision", self.rho));
        }
        Ok((self.tau / self.rho, 1.0 / self.rho))
    }

    /// Mean, assuming the Gaussian is proper.
    #[inline]
    pub fn mean(self) -> f64 {
        self.tau / self.rho
    }

    /// Variance, assuming the Gaussian is proper.
    #[inline]
    pub fn variance(self) -> f64 {
        1.0 / self.rho
    }

    /// `(E[x], E[x^2])` of a proper Gaussian.
    #[inline]
    pub fn raw_moments(self) -> (f64, f64) {
        let m = self.tau / self.rho;
        (m, m * m + 1.0 / self.rho)
    }

    #[inline]
    pub fn is_proper(self) -> bool {
        self.rho > 0.0 && self.is_finite()
    }

    #[inline]
    pub fn is_uniform(self) -> bool {
        self.tau == 0.0 && self.rho == 0.0
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.tau.is_finite() && self.rho.is_finite()
    }

    /// Product of densities: natural parameters add.
    #[inline]
    pub fn multiply(self, other: Gaussian) -> Gaussian {
        Gaussian {
            tau: self.tau + other.tau,
            rho: self.rho + other.rho,
        }
    }

    /// Quotient of densities: natural parameters subtract. The result may have
    /// negative precision; callers that store it must check.
    #[inline]
    pub fn divide(self, other: Gaussian) -> Gaussian {
        Gaussian {
            tau: self.tau - other.tau,
            rho: self.rho - other.rho,
        }
    }

    /// Scales the natural parameters, i.e. raises the density to a power.
    #[inline]
    pub fn scale(self, factor: f64) -> Gaussian {
        Gaussian {
            tau: self.tau * factor,
            rho: self.rho * factor,
        }
    }
}

impl Mul for Gaussian {
    type Output = Gaussian;
    #[inline]
    fn mul(self, rhs: Gaussian) -> Gaussian {
        self.multiply(rhs)
    }
}

impl MulAssign for Gaussian {
    #[inline]
    fn mul_assign(&mut self, rhs: Gaussian) {
        *self = self.multiply(rhs);
    }
}

impl Div for Gaussian {
    type Output = Gaussian;
    #[inline]
    fn div(self, rhs: Gaussian) -> Gaussian {
        self.divide(rhs)
    }
}

impl DivAssign for Gaussian {
    #[inline]
    fn div_assign(&mut self, rhs: Gaussian) {
        *self = self.divide(rhs);
    }
}

impl std::iter::Product for Gaussian {
    fn product<I: Iterator<Item = Gaussian>>(iter: I) -> Gaussian {
        iter.fold(Gaussian::UNIFORM, Gaussian::multiply)
    }
}

impl fmt::Display for Gaussian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G(tau={}, rho={})", self.tau, self.rho)
    }
}

/// Zeroth, first and second raw moments of a non-negative function.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MomentTriple {
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
}

impl MomentTriple {
    pub const fn new(m0: f64, m1: f64, m2: f64) -> Self {
        MomentTriple { m0, m1, m2 }
    }

    pub fn add(self, other: MomentTriple) -> MomentTriple {
        MomentTriple {
            m0: self.m0 + other.m0,
            m1: self.m1 + other.m1,
            m2: self.m2 + other.m2,
        }
    }

    /// Normalized mean and variance, or `None` when the mass vanishes, the
    /// values are not finite or the implied variance is not positive.
    pub fn mean_var(self) -> Option<(f64, f64)> {
        if !(self.m0 > 0.0) || !self.m0.is_finite() {
            return None;
        }
        let mean = self.m1 / self.m0;
        let var = self.m2 / self.m0 - mean * mean;
        (mean.is_finite() && var > 0.0 && var.is_finite()).then_some((mean, var))
    }

    /// The moment-matched Gaussian.
    pub fn to_gaussian(self) -> Option<Gaussian> {
        let (mean, var) = self.mean_var()?;
        Gaussian::from_moments(mean, var).ok()
    }
}
