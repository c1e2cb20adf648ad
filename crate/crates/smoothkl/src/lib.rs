//! Label smoothing treated as a loss-function modification for logistic
//! regression.
//!
//! The crate provides:
//!
//! - the smoothing map, its inverse, and the smoothed KL divergence
//!   ([`smoothing`]);
//! - binary and multiclass surrogate losses for the LR / LSLR / MLSLR / LSQLR
//!   families with exact gradients, and the bounded transformations that
//!   relate them to classical robust logistic regressions ([`losses`]);
//! - logit and roughened-logit probability estimators, labeling rules, and
//!   simplex-deviation metrics ([`predictors`]);
//! - quadrature-based sandwich covariances and asymptotic relative
//!   efficiencies for the binary linear model ([`asymptotics`],
//!   [`quadrature`]);
//! - synthetic data generation, deterministic Adam trainers for linear models
//!   and small dense networks, and the bias / task-risk / surrogate-risk
//!   evaluators ([`estimation`]).
//!
//! All randomized routines are driven by explicit seeds through splittable
//! streams ([`rng`]), so every result is reproducible bit for bit regardless
//! of thread count.

pub mod asymptotics;
pub mod error;
pub mod estimation;
pub mod losses;
pub mod numeric;
pub mod predictors;
pub mod quadrature;
pub mod rng;
pub mod smoothing;

pub use error::{Error, Result};
