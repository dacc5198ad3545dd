use serde::Serialize;

use crate::allocator::d_pi;
use crate::designs::Design;
use crate::error::Result;
use crate::estimators::DifferenceEstimator;
use crate::popmodel::PopulationBounds;

use super::{
    bayes_dominance_audit, max_vertex_bias, product_prior_bayes_risk, sharpness_audit,
    vertex_risk_profile, OracleLimits, ProductPrior, SharpnessVerdict,
};

/// Vertex-risk summary of one unbiased estimator against `D_π`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorBound {
    pub estimator: String,
    pub mean_vertex_risk: f64,
    pub sup_vertex_risk: f64,
    pub max_abs_bias: f64,
    /// `mean_vertex_risk >= D_π - tol`.
    pub bound_holds: bool,
    /// Bayes risk under the certification prior is no smaller than the
    /// midpoint-differenced estimator's.
    pub midpoint_not_beaten: bool,
}

/// Everything the exhaustive oracle can establish about one (design, bounds) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    #[serde(flatten)]
    pub sharpness: SharpnessVerdict,
    pub estimators: Vec<EstimatorBound>,
    /// Prior used for the Bayes-risk checks: "three-point(q=0.25)" or "vertex".
    pub prior: String,
    pub bayes_risk_midpoint: f64,
    pub bayes_risk_closed_form: f64,
    pub lower_bound_holds: bool,
}

impl Certificate {
    pub fn bayes_identity_residual(&self) -> f64 {
        (self.bayes_risk_midpoint - self.bayes_risk_closed_form).abs()
    }

    /// All checks consistent with the theory at tolerance `tol`.
    pub fn passed(&self, tol: f64) -> bool {
        let scale = self.sharpness.d_pi.max(1.0);
        self.lower_bound_holds
            && self.sharpness.equivalence_holds
            && self.sharpness.walsh_residual_max <= tol * scale
            && self.sharpness.walsh_constant_residual <= tol * scale
            && self.bayes_identity_residual() <= tol * self.bayes_risk_closed_form.max(1.0)
            && self.estimators.iter().all(|e| e.midpoint_not_beaten)
    }
}

/// Runs the sharpness audit plus lower-bound, unbiasedness and Bayes-risk
/// checks for the midpoint, plain and each `challenger_centers` difference
/// estimator.
pub fn certify(
    design: &Design,
    bounds: &PopulationBounds,
    challenger_centers: &[Vec<f64>],
    tol: f64,
    limits: OracleLimits,
) -> Result<Certificate> {
    let sharpness = sharpness_audit(design, bounds, tol, limits)?;
    let pi = design.first_order();
    let d = d_pi(bounds.radii(), &pi)?;
    let risk_tol = tol * d.max(1.0);

    let (prior, prior_name) = if 3f64.powi(bounds.len() as i32) <= limits.max_support as f64 {
        (ProductPrior::three_point(bounds, 0.25)?, "three-point(q=0.25)")
    } else {
        (ProductPrior::vertex(bounds)?, "vertex")
    };

    let mut candidates: Vec<(String, DifferenceEstimator)> = vec![
        ("midpoint-ht".into(), DifferenceEstimator::midpoint(bounds, &pi)?),
        ("plain-ht".into(), DifferenceEstimator::plain(&pi)?),
    ];
    for (k, centers) in challenger_centers.iter().enumerate() {
        candidates.push((
            format!("differenced-ht#{}", k + 1),
            DifferenceEstimator::differenced(centers.clone(), &pi)?,
        ));
    }

    let mut estimators = Vec::with_capacity(candidates.len());
    for (name, estimator) in &candidates {
        let profile = if name == "midpoint-ht" {
            sharpness.profile.clone()
        } else {
            vertex_risk_profile(design, estimator, bounds, limits)?
        };
        let dominance = bayes_dominance_audit(design, bounds, &prior, estimator, limits)?;
        estimators.push(EstimatorBound {
            estimator: name.clone(),
            mean_vertex_risk: profile.mean,
            sup_vertex_risk: profile.sup,
            max_abs_bias: max_vertex_bias(design, estimator, bounds, limits)?,
            bound_holds: profile.mean >= d - risk_tol,
            midpoint_not_beaten: dominance.midpoint_not_beaten,
        });
    }

    let bayes_risk_midpoint = product_prior_bayes_risk(design, &candidates[0].1, &prior, limits)?;
    Ok(Certificate {
        lower_bound_holds: estimators.iter().all(|e| e.bound_holds),
        sharpness,
        estimators,
        prior: prior_name.to_string(),
        bayes_risk_midpoint,
        bayes_risk_closed_form: prior.midpoint_bayes_risk(&pi),
    })
}
