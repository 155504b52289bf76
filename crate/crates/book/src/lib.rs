//! The guide in `book/` is mdbook Markdown. Each chapter is attached to a
//! module here so `cargo test` runs its snippets as doc tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/gaussians.md")]
pub mod gaussians {}
#[doc = include_str!("../../../book/src/factors.md")]
pub mod factors {}
#[doc = include_str!("../../../book/src/layers.md")]
pub mod layers {}
#[doc = include_str!("../../../book/src/training.md")]
pub mod training {}
#[doc = include_str!("../../../book/src/metrics.md")]
pub mod metrics {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
