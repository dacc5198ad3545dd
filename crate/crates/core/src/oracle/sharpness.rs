use serde::Serialize;

use crate::allocator::d_pi;
use crate::designs::Design;
use crate::error::Result;
use crate::estimators::DifferenceEstimator;
use crate::popmodel::PopulationBounds;

use super::{
    expected_walsh_coefficients, vertex_risk_profile, walsh_delta_recovery, OracleLimits,
    VertexRiskProfile,
};

/// Whether the midpoint-differenced estimator attains the lower bound
/// `D_π` under a given design, and whether that agrees with pairwise
/// independence of the inclusion indicators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessVerdict {
    pub d_pi: f64,
    pub sup_vertex_risk: f64,
    pub mean_vertex_risk: f64,
    pub delta_max: f64,
    pub attains: bool,
    pub pairwise_independent: bool,
    /// `attains == pairwise_independent`.
    pub equivalence_holds: bool,
    /// Largest deviation of recovered pair coefficients from `2Δ_ij r_i r_j/(π_i π_j)`.
    pub walsh_residual_max: f64,
    /// `|constant Walsh coefficient - D_π|`.
    pub walsh_constant_residual: f64,
    /// Risk tolerance actually applied: `tol * max(1, D_π)`.
    pub risk_tolerance: f64,
    #[serde(skip)]
    pub profile: VertexRiskProfile,
}

/// Exhaustive sharpness check for the midpoint-differenced estimator.
///
/// `tol` bounds `max |Δ_ij|` directly and `|sup - D_π|` after scaling by
/// `max(1, D_π)`.
pub fn sharpness_audit(
    design: &Design,
    bounds: &PopulationBounds,
    tol: f64,
    limits: OracleLimits,
) -> Result<SharpnessVerdict> {
    bounds.require_nondegenerate()?;
    super::check_population(bounds.len(), design.population())?;
    let pi = design.first_order();
    let second = design.second_order();
    let d = d_pi(bounds.radii(), &pi)?;
    let estimator = DifferenceEstimator::midpoint(bounds, &pi)?;
    let profile = vertex_risk_profile(design, &estimator, bounds, limits)?;
    let recovery = walsh_delta_recovery(&profile, &pi, bounds.radii())?;
    let expected = expected_walsh_coefficients(&second, bounds.radii());

    let risk_tolerance = tol * d.max(1.0);
    let delta_max = second.max_offdiag_delta();
    let attains = (profile.sup - d).abs() <= risk_tolerance;
    let pairwise_independent = delta_max <= tol;
    Ok(SharpnessVerdict {
        d_pi: d,
        sup_vertex_risk: profile.sup,
        mean_vertex_risk: profile.mean,
        delta_max,
        attains,
        pairwise_independent,
        equivalence_holds: attains == pairwise_independent,
        walsh_residual_max: recovery.pair_residual(&expected),
        walsh_constant_residual: (recovery.constant - d).abs(),
        risk_tolerance,
        profile,
    })
}
