//! Bayesian neural networks trained by message passing.
//!
//! Every weight, pre-activation and activation is a scalar Gaussian variable
//! in a factor graph. Training alternates forward and backward sweeps of
//! moment-matched messages through linear, convolution, activation, pooling
//! and likelihood factors, and keeps a diagonal Gaussian posterior over the
//! weights. Each datum contributes exactly one message to that posterior no
//! matter how often it is revisited.
//!
//! - [`gaussian`] and [`normal`]: natural-parameter Gaussians and the
//!   truncated-normal integrals the message equations are built from.
//! - [`factors`]: the stateless forward and backward message equations.
//! - [`layers`]: network description, shape inference and per-example sweeps.
//! - [`trainer`]: batching, the marginal bookkeeping and damping.
//! - [`metrics`]: predictive scores, calibration, OOD detection and the
//!   credible-interval coverage study.
//! - [`modelspec`], [`config`], [`checkpoint`] and [`data`]: file formats.

// Range checks are written `!(x > 0.0)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkpoint;
pub mod config;
pub mod data;
pub mod error;
pub mod factors;
pub mod gaussian;
pub mod layers;
pub mod metrics;
pub mod modelspec;
pub mod normal;
pub mod rng;
pub mod trainer;

pub use error::{Error, Result};
pub use gaussian::{Gaussian, MomentTriple};
