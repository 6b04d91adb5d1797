//! Multi-stage decision pipelines and their fairness.
//!
//! The crate models straight (filtering) pipelines over populations of
//! records, measures `(1+eps)`-equal opportunity of each stage and of the
//! whole pipeline, checks the multiplicative composition bound on exact
//! outcome distributions, reproduces the two-stage hiring toy model, and
//! simulates participation-incentive feedback loops.
//!
//! Exact probabilities are carried as [`Rational`]s wherever an inequality
//! verdict depends on them; floating point is reserved for Monte Carlo and
//! the dynamical-systems code.

pub mod composition;
pub mod error;
pub mod exec;
pub mod feedback;
pub mod hiring;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use exec::Execution;
pub use scalar::{Prob, Rational};
