//! Bayesian logistic-softmax models over all interaction patterns up to a
//! given order, made tractable by grouping patterns that are expressed by the
//! same training cases and sampling only the sums of their coefficients.

pub mod config;
pub mod data;
pub mod error;
pub mod grouping;
pub mod math;
pub mod mcmc;
pub mod predict;
pub mod prior;
pub mod split;

pub use error::{Error, Result};

/// Crate version, written into output headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
