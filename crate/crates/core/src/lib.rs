//! Multi-objective Bayesian optimization of loss-weight vectors.
//!
//! The crate is organised bottom-up:
//!
//! - [`pareto`]: dominance, non-dominated fronts, hypervolume and hypervolume improvement.
//! - [`gp`]: per-objective Gaussian-process surrogates (Matérn-5/2, ARD).
//! - [`acquisition`]: expected improvement, expected hypervolume improvement and the
//!   inner maximisation over the unit cube.
//! - [`engine`]: the outer optimisation loop, run configuration and the append-only archive.
//! - [`restoration`]: a desk-scale weighted-loss image restorer wrapped as an evaluator.
//! - [`problems`]: analytic bi-objective test problems.

pub mod acquisition;
pub mod engine;
pub mod error;
pub mod gp;
pub mod optim;
pub mod pareto;
pub mod problems;
pub mod restoration;
pub mod sobol;
pub mod stats;

pub use error::{Error, Result};
