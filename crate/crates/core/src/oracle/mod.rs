//! Exact verification by enumeration over design support and rectangle
//! vertices. Intended for small populations (`N <= 20`); larger problems
//! belong to [`crate::mc`].
//!
//! Vertices are indexed by a bit mask: bit `i` set means `ε_i = +1`.

mod bayes;
mod certify;
mod sharpness;
pub mod suite;
mod walsh;

pub use bayes::{bayes_dominance_audit, product_prior_bayes_risk, DominanceRecord, ProductPrior};
pub use certify::{certify, Certificate, EstimatorBound};
pub use sharpness::{sharpness_audit, SharpnessVerdict};
pub use walsh::{expected_walsh_coefficients, walsh_delta_recovery, walsh_transform, WalshRecovery};

use rayon::prelude::*;
use serde::Serialize;

use crate::designs::{Design, EnumeratedDesign, DEFAULT_SUPPORT_CAP};
use crate::error::{Error, Result};
use crate::estimators::Estimator;
use crate::popmodel::{OutcomeVector, PopulationBounds, SignVector};

/// Default absolute tolerance on risk values; scaled by `max(1, D_π)`.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Caps on exhaustive enumeration. Both may only be lowered from the defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_units: usize,
    pub max_support: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_units: 20,
            max_support: DEFAULT_SUPPORT_CAP,
        }
    }
}

impl OracleLimits {
    pub fn lowered(max_units: usize, max_support: usize) -> Self {
        let d = Self::default();
        OracleLimits {
            max_units: max_units.min(d.max_units),
            max_support: max_support.min(d.max_support),
        }
    }

    fn check_units(&self, units: usize) -> Result<()> {
        if units > self.max_units {
            return Err(Error::PopulationTooLarge {
                units,
                cap: self.max_units,
            });
        }
        Ok(())
    }
}

pub(crate) fn check_population(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn risk_on_listing<E: Estimator + ?Sized>(listing: &EnumeratedDesign, estimator: &E, y: &[f64]) -> f64 {
    let total: f64 = y.iter().sum();
    listing
        .support()
        .iter()
        .map(|s| {
            let err = estimator.estimate_indexed(&s.units, y) - total;
            s.probability * err * err
        })
        .sum()
}

fn mean_on_listing<E: Estimator + ?Sized>(listing: &EnumeratedDesign, estimator: &E, y: &[f64]) -> f64 {
    listing
        .support()
        .iter()
        .map(|s| s.probability * estimator.estimate_indexed(&s.units, y))
        .sum()
}

/// `R(δ, p; y) = Σ_s p(s) (δ_s(y_s) - T(y))²`.
pub fn exact_risk_enum<E: Estimator + ?Sized>(
    design: &Design,
    estimator: &E,
    y: &OutcomeVector,
) -> Result<f64> {
    check_population(design.population(), y.len())?;
    check_population(design.population(), estimator.population())?;
    let listing = design.enumerate(DEFAULT_SUPPORT_CAP)?;
    Ok(risk_on_listing(&listing, estimator, y.values()))
}

/// `Σ_s p(s) δ_s(y_s) - T(y)`.
pub fn exact_bias_enum<E: Estimator + ?Sized>(
    design: &Design,
    estimator: &E,
    y: &OutcomeVector,
) -> Result<f64> {
    check_population(design.population(), y.len())?;
    check_population(design.population(), estimator.population())?;
    let listing = design.enumerate(DEFAULT_SUPPORT_CAP)?;
    Ok(mean_on_listing(&listing, estimator, y.values()) - y.total())
}

/// Exact risk at every vertex of the rectangle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexRiskProfile {
    pub units: usize,
    /// `risks[mask]` is the risk at the vertex labelled by `mask`.
    pub risks: Vec<f64>,
    pub sup: f64,
    /// Uniform-vertex Bayes risk.
    pub mean: f64,
}

impl VertexRiskProfile {
    pub fn risk_at(&self, signs: &SignVector) -> f64 {
        let mask = signs
            .signs()
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0)
            .fold(0usize, |m, (i, _)| m | 1 << i);
        self.risks[mask]
    }

    /// Vertex mask attaining the supremum (first in mask order).
    pub fn argmax(&self) -> usize {
        self.risks
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &r)| if r > best.1 { (i, r) } else { best })
            .0
    }
}

/// Risk of `estimator` at all `2^N` vertices.
pub fn vertex_risk_profile<E: Estimator + ?Sized>(
    design: &Design,
    estimator: &E,
    bounds: &PopulationBounds,
    limits: OracleLimits,
) -> Result<VertexRiskProfile> {
    let units = bounds.len();
    limits.check_units(units)?;
    check_population(units, design.population())?;
    check_population(units, estimator.population())?;
    let listing = design.enumerate(limits.max_support)?;
    let lower: Vec<f64> = bounds.lower().collect();
    let upper: Vec<f64> = bounds.upper().collect();

    let risks: Vec<f64> = (0..1usize << units)
        .into_par_iter()
        .map_init(
            || vec![0.0; units],
            |y, mask| {
                for i in 0..units {
                    y[i] = if mask >> i & 1 == 1 { upper[i] } else { lower[i] };
                }
                risk_on_listing(&listing, estimator, y)
            },
        )
        .collect();
    let sup = risks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = risks.iter().sum::<f64>() / risks.len() as f64;
    Ok(VertexRiskProfile {
        units,
        risks,
        sup,
        mean,
    })
}

/// Largest `|bias|` of `estimator` over all vertices.
pub fn max_vertex_bias<E: Estimator + ?Sized>(
    design: &Design,
    estimator: &E,
    bounds: &PopulationBounds,
    limits: OracleLimits,
) -> Result<f64> {
    let units = bounds.len();
    limits.check_units(units)?;
    check_population(units, design.population())?;
    check_population(units, estimator.population())?;
    let listing = design.enumerate(limits.max_support)?;
    let lower: Vec<f64> = bounds.lower().collect();
    let upper: Vec<f64> = bounds.upper().collect();
    Ok((0..1usize << units)
        .into_par_iter()
        .map(|mask| {
            let y: Vec<f64> = (0..units)
                .map(|i| if mask >> i & 1 == 1 { upper[i] } else { lower[i] })
                .collect();
            (mean_on_listing(&listing, estimator, &y) - y.iter().sum::<f64>()).abs()
        })
        .reduce(|| 0.0, f64::max))
}
