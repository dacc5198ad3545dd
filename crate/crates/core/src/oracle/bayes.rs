use rayon::prelude::*;
use serde::Serialize;

use crate::designs::{Design, EnumeratedDesign, InclusionProbabilities};
use crate::error::{Error, Result};
use crate::estimators::{DifferenceEstimator, Estimator};
use crate::popmodel::PopulationBounds;

use super::{mean_on_listing, risk_on_listing, OracleLimits, DEFAULT_TOLERANCE};

/// A product of finite distributions, one per unit, each centred at the
/// unit midpoint with positive variance and support inside `[a_i, b_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductPrior {
    marginals: Vec<Vec<(f64, f64)>>,
    variances: Vec<f64>,
    midpoints: Vec<f64>,
}

impl ProductPrior {
    /// Two-point prior on `{a_i, b_i}` with equal weights: the uniform vertex prior.
    pub fn vertex(bounds: &PopulationBounds) -> Result<Self> {
        Self::new(
            bounds,
            bounds
                .units()
                .iter()
                .map(|u| vec![(u.lower, 0.5), (u.upper, 0.5)])
                .collect(),
        )
    }

    /// Weights `(q, 1 - 2q, q)` on `{a_i, m_i, b_i}`, `0 < q <= 1/2`.
    pub fn three_point(bounds: &PopulationBounds, q: f64) -> Result<Self> {
        if !(q > 0.0 && q <= 0.5) {
            return Err(Error::InvalidPrior(format!("q = {q} outside (0, 1/2]")));
        }
        Self::new(
            bounds,
            bounds
                .units()
                .iter()
                .zip(bounds.midpoints())
                .map(|(u, &m)| {
                    let mut points = vec![(u.lower, q), (u.upper, q)];
                    if q < 0.5 {
                        points.insert(1, (m, 1.0 - 2.0 * q));
                    }
                    points
                })
                .collect(),
        )
    }

    /// Validates `(value, weight)` marginals against the bounds.
    pub fn new(bounds: &PopulationBounds, marginals: Vec<Vec<(f64, f64)>>) -> Result<Self> {
        if marginals.len() != bounds.len() {
            return Err(Error::LengthMismatch {
                expected: bounds.len(),
                got: marginals.len(),
            });
        }
        let tol = bounds.default_tolerance();
        let mut variances = Vec::with_capacity(marginals.len());
        for (i, (marginal, unit)) in marginals.iter().zip(bounds.units()).enumerate() {
            let m = bounds.midpoints()[i];
            if marginal.is_empty() {
                return Err(Error::InvalidPrior(format!("unit `{}` has empty support", unit.id)));
            }
            if marginal.iter().any(|&(_, w)| !(w > 0.0 && w.is_finite())) {
                return Err(Error::InvalidPrior(format!(
                    "unit `{}` has a nonpositive weight",
                    unit.id
                )));
            }
            if marginal
                .iter()
                .any(|&(v, _)| v < unit.lower - tol || v > unit.upper + tol)
            {
                return Err(Error::InvalidPrior(format!(
                    "unit `{}` has support outside its interval",
                    unit.id
                )));
            }
            let weight: f64 = marginal.iter().map(|&(_, w)| w).sum();
            if (weight - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidPrior(format!(
                    "unit `{}` weights sum to {weight}",
                    unit.id
                )));
            }
            let mean: f64 = marginal.iter().map(|&(v, w)| v * w).sum();
            let scale = 1f64.max(unit.lower.abs()).max(unit.upper.abs());
            if (mean - m).abs() > 1e-12 * scale {
                return Err(Error::InvalidPrior(format!(
                    "unit `{}` has mean {mean}, midpoint is {m}",
                    unit.id
                )));
            }
            let variance: f64 = marginal.iter().map(|&(v, w)| w * (v - m) * (v - m)).sum();
            if variance <= 0.0 {
                return Err(Error::InvalidPrior(format!(
                    "unit `{}` has zero variance",
                    unit.id
                )));
            }
            variances.push(variance);
        }
        Ok(ProductPrior {
            marginals,
            variances,
            midpoints: bounds.midpoints().to_vec(),
        })
    }

    pub fn units(&self) -> usize {
        self.marginals.len()
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn marginals(&self) -> &[Vec<(f64, f64)>] {
        &self.marginals
    }

    /// Number of joint support points, saturating.
    pub fn support_size(&self) -> u128 {
        self.marginals
            .iter()
            .try_fold(1u128, |acc, m| acc.checked_mul(m.len() as u128))
            .unwrap_or(u128::MAX)
    }

    /// Bayes risk of the midpoint-differenced estimator in closed form:
    /// `Σ σ_i² (1/π_i - 1)`, valid for any design with these `π`.
    pub fn midpoint_bayes_risk(&self, pi: &InclusionProbabilities) -> f64 {
        self.variances
            .iter()
            .zip(pi.as_slice())
            .map(|(s2, p)| s2 * (1.0 / p - 1.0))
            .sum()
    }

    pub fn midpoints(&self) -> &[f64] {
        &self.midpoints
    }

    /// The joint support point with flat index `index`, plus its weight.
    fn point(&self, mut index: u128, y: &mut [f64]) -> f64 {
        let mut weight = 1.0;
        for (slot, marginal) in y.iter_mut().zip(&self.marginals) {
            let k = marginal.len() as u128;
            let (v, w) = marginal[(index % k) as usize];
            index /= k;
            *slot = v;
            weight *= w;
        }
        weight
    }

    fn value_scale(&self) -> f64 {
        self.marginals
            .iter()
            .map(|m| m.iter().map(|(v, _)| v.abs()).fold(0.0, f64::max))
            .sum::<f64>()
            .max(1.0)
    }
}

fn check_prior(design: &Design, prior: &ProductPrior, limits: OracleLimits) -> Result<u128> {
    super::check_population(design.population(), prior.units())?;
    let support = prior.support_size();
    if support > limits.max_support as u128 {
        return Err(Error::PriorTooLarge {
            support,
            cap: limits.max_support,
        });
    }
    Ok(support)
}

/// Per support point: (weight, mean estimate - T(y), risk).
fn evaluate_prior<E: Estimator + ?Sized>(
    listing: &EnumeratedDesign,
    estimator: &E,
    prior: &ProductPrior,
    support: u128,
) -> Vec<(f64, f64, f64)> {
    let units = prior.units();
    (0..support as u64)
        .into_par_iter()
        .map_init(
            || vec![0.0; units],
            |y, index| {
                let weight = prior.point(index as u128, y);
                let bias = mean_on_listing(listing, estimator, y) - y.iter().sum::<f64>();
                (weight, bias, risk_on_listing(listing, estimator, y))
            },
        )
        .collect()
}

/// `∫ R(δ, p; y) dμ(y)` by enumerating the prior support and the design.
pub fn product_prior_bayes_risk<E: Estimator + ?Sized>(
    design: &Design,
    estimator: &E,
    prior: &ProductPrior,
    limits: OracleLimits,
) -> Result<f64> {
    let support = check_prior(design, prior, limits)?;
    super::check_population(design.population(), estimator.population())?;
    let listing = design.enumerate(limits.max_support)?;
    Ok(evaluate_prior(&listing, estimator, prior, support)
        .iter()
        .map(|(w, _, r)| w * r)
        .sum())
}

/// Bayes risks of a challenger and of the midpoint-differenced estimator
/// under the same prior and design.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceRecord {
    pub challenger_risk: f64,
    pub midpoint_risk: f64,
    /// `Σ σ_i² (1/π_i - 1)`.
    pub midpoint_closed_form: f64,
    pub max_abs_bias: f64,
    /// `challenger_risk >= midpoint_risk - tol`.
    pub midpoint_not_beaten: bool,
    /// `challenger_risk > midpoint_risk + tol`.
    pub challenger_strictly_worse: bool,
}

/// Compares an unbiased challenger against the midpoint-differenced estimator.
///
/// Unbiasedness is checked at every prior support point, with tolerance
/// `1e-9 * max(1, Σ_i max |support_i|)`.
pub fn bayes_dominance_audit<E: Estimator + ?Sized>(
    design: &Design,
    bounds: &PopulationBounds,
    prior: &ProductPrior,
    challenger: &E,
    limits: OracleLimits,
) -> Result<DominanceRecord> {
    let support = check_prior(design, prior, limits)?;
    super::check_population(design.population(), challenger.population())?;
    super::check_population(design.population(), bounds.len())?;
    let listing = design.enumerate(limits.max_support)?;
    let pi = design.first_order();

    let bias_tol = DEFAULT_TOLERANCE * prior.value_scale();
    let challenger_points = evaluate_prior(&listing, challenger, prior, support);
    let max_abs_bias = challenger_points
        .iter()
        .map(|(_, b, _)| b.abs())
        .fold(0.0, f64::max);
    if max_abs_bias > bias_tol {
        return Err(Error::BiasedChallenger { bias: max_abs_bias });
    }
    let challenger_risk: f64 = challenger_points.iter().map(|(w, _, r)| w * r).sum();

    let midpoint = DifferenceEstimator::midpoint(bounds, &pi)?;
    let midpoint_risk: f64 = evaluate_prior(&listing, &midpoint, prior, support)
        .iter()
        .map(|(w, _, r)| w * r)
        .sum();
    let midpoint_closed_form = prior.midpoint_bayes_risk(&pi);
    let tol = DEFAULT_TOLERANCE * midpoint_closed_form.max(1.0);
    Ok(DominanceRecord {
        challenger_risk,
        midpoint_risk,
        midpoint_closed_form,
        max_abs_bias,
        midpoint_not_beaten: challenger_risk >= midpoint_risk - tol,
        challenger_strictly_worse: challenger_risk > midpoint_risk + tol,
    })
}
