//! Minimax sampling designs and difference estimators for finite-population
//! totals whose per-unit outcomes lie in known intervals `[a_i, b_i]`.
//!
//! The crate is organised bottom-up:
//!
//! - [`popmodel`]: the parameter rectangle, midpoints, radii and vertices.
//! - [`designs`]: sampling designs with exact first/second-order inclusion
//!   probabilities and reproducible sample drawing.
//! - [`allocator`]: the water-filling allocation `pi_i = min(1, c r_i)` under an
//!   expected-sample-size budget, and the worst-case risk bound `D_pi`.
//! - [`estimators`]: midpoint-differenced, plain and arbitrary-center
//!   Horvitz–Thompson estimators plus their closed-form risk.
//! - [`oracle`]: exhaustive enumeration over samples and rectangle vertices
//!   for exact risk, sharpness and Bayes-risk checks at small `N`.
//! - [`mc`]: seeded Monte-Carlo risk estimation for larger populations.

pub mod allocator;
pub mod designs;
pub mod error;
pub mod estimators;
pub mod mc;
pub mod oracle;
pub mod popmodel;
pub mod rng;

pub use error::{Error, Result};
