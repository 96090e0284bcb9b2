//! Score-profile empirical likelihood inference for the best policy value.
//!
//! Given per-observation policy scores `X_i` (rows of an n x J matrix, one
//! column per candidate policy), this crate builds one-sided lower confidence
//! bounds for `tau = max_j theta_j`, the value of the best policy. The profile
//! statistic is the Euclidean empirical-likelihood distance from the score mean
//! to the level set `{m : max_j m_j = tau}`; the bound is obtained by running a
//! concave maximization over the policy simplex with a calibrated radius.
//!
//! Module map:
//! - [`rng`]: deterministic, path-addressed random streams,
//! - [`dist`]: chi-square and normal quantiles (self-contained),
//! - [`scores`]: score matrices and their mean/covariance summaries,
//! - [`geometry`]: projections onto max-level-set faces and tangent cones,
//! - [`profile`]: the profile statistic, its inversion, and the simplex bound,
//! - [`calibrate`]: active-set estimation, bootstrap critical values, and the
//!   end-to-end inference entry point plus comparator bounds,
//! - [`aipw`]: semiparametric data generation and cross-fitted AIPW scoring,
//! - [`simlab`]: simulation designs, the Monte Carlo harness, and timing.

pub mod aipw;
pub mod calibrate;
pub mod dist;
mod error;
pub mod geometry;
pub mod profile;
pub mod rng;
pub mod scores;
pub mod simlab;

pub use error::{Error, Result};
