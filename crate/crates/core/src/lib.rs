//! Importance sampling for tail probabilities of the largest-eigenvalue
//! to trace ratio of real and complex Wishart matrices.

// NaN-rejecting guards are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod ensemble;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod mplaw;
pub mod oracle;
pub mod quad;
pub mod rng;
pub mod special;
pub mod stats;
pub mod tracywidom;
pub mod weights;

pub use ensemble::{Beta, ModelConfig, Spectrum};
pub use error::{Error, Result};
