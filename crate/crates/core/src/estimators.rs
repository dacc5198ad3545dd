//! Difference estimators of the population total.
//!
//! Every estimator here has the form `Σ w_i + Σ_{i∈S} (y_i - w_i) / π_i`
//! for known centers `w`: the midpoint-differenced estimator uses `w = m`,
//! the plain Horvitz–Thompson estimator uses `w = 0`. All are
//! design-unbiased for any fixed `w`. Estimates are never clamped.

use crate::allocator::d_pi_unchecked;
use crate::designs::{InclusionProbabilities, Sample, SecondOrderMatrix};
use crate::error::{Error, Result};
use crate::popmodel::{OutcomeVector, PopulationBounds};

/// A rule mapping a realized sample to an estimate of the total.
pub trait Estimator: Sync {
    fn population(&self) -> usize;

    /// Estimate from the sampled indices, reading `y[i]` only for sampled `i`.
    fn estimate_indexed(&self, indices: &[usize], y: &[f64]) -> f64;

    fn estimate(&self, sample: &Sample) -> Result<f64> {
        let n = self.population();
        let mut y = vec![f64::NAN; n];
        for (i, v) in sample.iter() {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, units: n });
            }
            if !v.is_finite() {
                return Err(Error::MissingValue(i));
            }
            y[i] = v;
        }
        Ok(self.estimate_indexed(sample.indices(), &y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    MidpointHt,
    PlainHt,
    DifferencedHt,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::MidpointHt => "midpoint-ht",
            EstimatorKind::PlainHt => "plain-ht",
            EstimatorKind::DifferencedHt => "differenced-ht",
        }
    }
}

/// `Σ w_i + Σ_{i∈S} (y_i - w_i) / π_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceEstimator {
    kind: EstimatorKind,
    centers: Vec<f64>,
    center_total: f64,
    pi: InclusionProbabilities,
}

impl DifferenceEstimator {
    pub fn midpoint(bounds: &PopulationBounds, pi: &InclusionProbabilities) -> Result<Self> {
        Self::build(EstimatorKind::MidpointHt, bounds.midpoints().to_vec(), pi)
    }

    pub fn plain(pi: &InclusionProbabilities) -> Result<Self> {
        Self::build(EstimatorKind::PlainHt, vec![0.0; pi.len()], pi)
    }

    pub fn differenced(centers: Vec<f64>, pi: &InclusionProbabilities) -> Result<Self> {
        Self::build(EstimatorKind::DifferencedHt, centers, pi)
    }

    fn build(kind: EstimatorKind, centers: Vec<f64>, pi: &InclusionProbabilities) -> Result<Self> {
        if centers.len() != pi.len() {
            return Err(Error::LengthMismatch {
                expected: pi.len(),
                got: centers.len(),
            });
        }
        Ok(DifferenceEstimator {
            kind,
            center_total: centers.iter().sum(),
            centers,
            pi: pi.clone(),
        })
    }

    pub fn kind(&self) -> EstimatorKind {
        self.kind
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn inclusion(&self) -> &InclusionProbabilities {
        &self.pi
    }

    /// Estimate plus a flag for whether it lies in `[Σ a_i, Σ b_i]`.
    pub fn estimate_with_range(
        &self,
        bounds: &PopulationBounds,
        sample: &Sample,
    ) -> Result<RangedEstimate> {
        let estimate = self.estimate(sample)?;
        let lo: f64 = bounds.lower().sum();
        let hi: f64 = bounds.upper().sum();
        let tol = bounds.default_tolerance() * bounds.len() as f64;
        Ok(RangedEstimate {
            estimate,
            in_range: lo - tol <= estimate && estimate <= hi + tol,
        })
    }

    /// Zero-based indices whose center lies outside `[a_i, b_i]`.
    pub fn centers_outside(&self, bounds: &PopulationBounds) -> Vec<usize> {
        bounds
            .units()
            .iter()
            .zip(&self.centers)
            .enumerate()
            .filter(|(_, (u, &w))| w < u.lower || w > u.upper)
            .map(|(i, _)| i)
            .collect()
    }
}

impl Estimator for DifferenceEstimator {
    fn population(&self) -> usize {
        self.centers.len()
    }

    fn estimate_indexed(&self, indices: &[usize], y: &[f64]) -> f64 {
        let pi = self.pi.as_slice();
        self.center_total
            + indices
                .iter()
                .map(|&i| (y[i] - self.centers[i]) / pi[i])
                .sum::<f64>()
    }
}

/// Ignores the sample and always reports the same number. Biased; useful as
/// a negative control for the verification routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantEstimator {
    pub population: usize,
    pub value: f64,
}

impl Estimator for ConstantEstimator {
    fn population(&self) -> usize {
        self.population
    }

    fn estimate_indexed(&self, _indices: &[usize], _y: &[f64]) -> f64 {
        self.value
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangedEstimate {
    pub estimate: f64,
    pub in_range: bool,
}

/// `Σ m_i + Σ_{i∈S} (y_i - m_i) / π_i`.
pub fn midpoint_ht(
    bounds: &PopulationBounds,
    pi: &InclusionProbabilities,
    sample: &Sample,
) -> Result<f64> {
    check_len(bounds.len(), pi.len())?;
    DifferenceEstimator::midpoint(bounds, pi)?.estimate(sample)
}

/// `Σ_{i∈S} y_i / π_i`.
pub fn plain_ht(pi: &InclusionProbabilities, sample: &Sample) -> Result<f64> {
    DifferenceEstimator::plain(pi)?.estimate(sample)
}

/// `Σ w_i + Σ_{i∈S} (y_i - w_i) / π_i`.
pub fn differenced_ht(
    centers: &[f64],
    pi: &InclusionProbabilities,
    sample: &Sample,
) -> Result<f64> {
    DifferenceEstimator::differenced(centers.to_vec(), pi)?.estimate(sample)
}

/// Closed-form risk of the difference estimator with centers `w`:
/// `Σ (1-π_i)/π_i z_i² + 2 Σ_{i<j} Δ_ij/(π_i π_j) z_i z_j`, `z = y - w`.
pub fn exact_risk_difference(
    centers: &[f64],
    pi: &InclusionProbabilities,
    second: &SecondOrderMatrix,
    y: &OutcomeVector,
) -> Result<f64> {
    let n = pi.len();
    for got in [centers.len(), second.units(), y.len()] {
        if got != n {
            return Err(Error::DimensionMismatch { expected: n, got });
        }
    }
    let p = pi.as_slice();
    let z: Vec<f64> = y.values().iter().zip(centers).map(|(y, w)| y - w).collect();
    let mut risk = 0.0;
    for i in 0..n {
        risk += (1.0 - p[i]) / p[i] * z[i] * z[i];
        for j in (i + 1)..n {
            risk += 2.0 * second.delta(i, j) / (p[i] * p[j]) * z[i] * z[j];
        }
    }
    Ok(risk)
}

/// `sup_Θ R(T̂, p; y) = Σ r_i² (1 - π_i) / π_i` for pairwise-independent designs.
pub fn sup_risk_pairwise(bounds: &PopulationBounds, pi: &InclusionProbabilities) -> Result<f64> {
    check_len(bounds.len(), pi.len())?;
    Ok(d_pi_unchecked(bounds.radii(), pi.as_slice()))
}

/// Bounds `[λ a_i + c_i, λ b_i + c_i]`, same unit ids.
pub fn affine_transform(bounds: &PopulationBounds, scale: f64, shifts: &[f64]) -> Result<PopulationBounds> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::NonpositiveScale(scale));
    }
    check_len(bounds.len(), shifts.len())?;
    PopulationBounds::from_records(
        bounds
            .units()
            .iter()
            .zip(shifts)
            .map(|(u, &c)| (u.id.clone(), scale * u.lower + c, scale * u.upper + c)),
    )
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch { expected, got });
    }
    Ok(())
}
