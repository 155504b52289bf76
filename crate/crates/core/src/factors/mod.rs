//! Stateless forward and backward message equations.

pub mod activation;
pub mod guard;
pub mod heads;
pub mod hermite;
pub mod linear;
pub mod pool;

pub use activation::{leakyrelu_backward, leakyrelu_forward_direct, leakyrelu_forward_marginal};
pub use guard::{FactorMessage, Fallback, GuardPolicy};
pub use heads::{
    argmax_backward, argmax_forward, argmax_probs, regression_backward, regression_forward,
    softmax_backward, softmax_forward, softmax_probs, ArgmaxMessages,
};
pub use linear::{
    inner_product_backward, inner_product_forward, product_backward, product_forward,
    weighted_sum_backward, weighted_sum_forward,
};
pub use pool::{clark_max, maxpool_messages};
