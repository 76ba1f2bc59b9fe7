//! Decision-theoretic uncertainty quantification on exact conjugate models.
//!
//! A loss function fixes the Bayes-optimal action, the uncertainty measure
//! (minimal expected loss) and the proper scoring rule. On top of that this
//! crate provides expected-uncertainty-reduction and information-gain
//! estimators for Beta–Bernoulli and Normal–Gamma models, a small Gaussian
//! process regressor, and a pool-based acquisition harness.

pub mod active;
pub mod conjugate;
pub mod decision;
pub mod dist;
pub mod error;
pub mod gp;
pub mod info;

pub use error::{Error, Result};
