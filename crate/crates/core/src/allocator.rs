//! Minimax inclusion probabilities under an expected-sample-size budget.
//!
//! The worst-case risk of any unbiased estimator under a design with
//! inclusion probabilities `π` is at least `D_π = Σ r_i² (1 - π_i) / π_i`.
//! Minimizing `D_π` over `0 < π_i <= 1, Σ π_i <= n` gives the water-fill
//! solution `π_i* = min(1, c r_i)` with `Σ π_i* = n`.

use serde::Serialize;

use crate::designs::InclusionProbabilities;
use crate::error::{Error, Result};

/// Optimal allocation for a budget `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignSolution {
    pub pi_star: InclusionProbabilities,
    /// Water-fill level. `f64::INFINITY` in the census case `n = N`.
    pub c: f64,
    /// Budget multiplier `c^-2`; zero in the census case.
    pub lambda: f64,
    /// Minimax value `V_n = D_{π*}`.
    pub v_n: f64,
    /// Zero-based indices with `π_i* = 1`.
    pub capped: Vec<usize>,
    pub budget: f64,
}

impl DesignSolution {
    pub fn is_census(&self) -> bool {
        self.c.is_infinite()
    }

    pub fn expected_size(&self) -> f64 {
        self.pi_star.sum()
    }
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    if let Some(i) = radii.iter().position(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::DegenerateUnit(format!("#{}", i + 1)));
    }
    Ok(())
}

/// `D_π = Σ r_i² (1 - π_i) / π_i`.
pub fn d_pi(radii: &[f64], pi: &InclusionProbabilities) -> Result<f64> {
    check_radii(radii)?;
    if pi.len() != radii.len() {
        return Err(Error::LengthMismatch {
            expected: radii.len(),
            got: pi.len(),
        });
    }
    Ok(d_pi_unchecked(radii, pi.as_slice()))
}

pub(crate) fn d_pi_unchecked(radii: &[f64], pi: &[f64]) -> f64 {
    radii
        .iter()
        .zip(pi)
        .map(|(&r, &p)| r * r * (1.0 - p) / p)
        .sum()
}

/// `H(c) = Σ min(1, c r_i)`.
pub fn waterfill_level_sum(radii: &[f64], c: f64) -> f64 {
    radii.iter().map(|&r| (c * r).min(1.0)).sum()
}

/// Solves `Σ min(1, c r_i) = n` exactly by scanning the breakpoints `1/r_i`.
///
/// With the `k` largest radii capped, `H` is affine: `H(c) = k + c S_k` where
/// `S_k` is the sum of the remaining radii. The solution lies on the first
/// segment whose level `c = (n - k) / S_k` leaves the largest uncapped unit
/// at or below one.
pub fn solve_waterfill(radii: &[f64], budget: f64) -> Result<DesignSolution> {
    check_radii(radii)?;
    let units = radii.len();
    if !(budget > 0.0 && budget <= units as f64) {
        return Err(Error::BudgetOutOfRange { budget, units });
    }
    if budget == units as f64 {
        return Ok(DesignSolution {
            pi_star: InclusionProbabilities::new(vec![1.0; units])?,
            c: f64::INFINITY,
            lambda: 0.0,
            v_n: 0.0,
            capped: (0..units).collect(),
            budget,
        });
    }

    let mut order: Vec<usize> = (0..units).collect();
    order.sort_by(|&i, &j| radii[j].total_cmp(&radii[i]));
    // suffix[k] = sum of radii[order[k..]]
    let mut suffix = vec![0.0; units + 1];
    for k in (0..units).rev() {
        suffix[k] = suffix[k + 1] + radii[order[k]];
    }

    let mut level = None;
    for k in 0..units {
        let remaining = budget - k as f64;
        if remaining <= 0.0 {
            break;
        }
        let c = remaining / suffix[k];
        if c * radii[order[k]] <= 1.0 {
            level = Some(c);
            break;
        }
    }
    let c = level.ok_or(Error::BudgetOutOfRange { budget, units })?;

    let pi: Vec<f64> = radii.iter().map(|&r| (c * r).min(1.0)).collect();
    let capped = (0..units).filter(|&i| pi[i] >= 1.0).collect();
    let v_n = d_pi_unchecked(radii, &pi);
    Ok(DesignSolution {
        pi_star: InclusionProbabilities::new(pi)?,
        c,
        lambda: 1.0 / (c * c),
        v_n,
        capped,
        budget,
    })
}

/// `V_n`, the smallest achievable worst-case risk under budget `n`.
pub fn minimax_value(radii: &[f64], budget: f64) -> Result<f64> {
    Ok(solve_waterfill(radii, budget)?.v_n)
}

/// Comparison of a feasible candidate against the water-fill optimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KktCertificate {
    /// `f(π) = Σ r_i² / π_i` at the candidate.
    pub candidate_objective: f64,
    pub optimal_objective: f64,
    /// Largest violation of `r_i²/π_i - r_i²/π_i* >= -λ (π_i - π_i*)` over
    /// coordinates, zero when all hold.
    pub max_support_violation: f64,
    pub certified: bool,
}

/// Certifies `f(candidate) >= f(π*) - tol`, checking the per-coordinate
/// supporting inequality as a diagnostic.
pub fn kkt_certificate(
    radii: &[f64],
    budget: f64,
    candidate: &[f64],
    tol: f64,
) -> Result<KktCertificate> {
    let solution = solve_waterfill(radii, budget)?;
    if candidate.len() != radii.len() {
        return Err(Error::LengthMismatch {
            expected: radii.len(),
            got: candidate.len(),
        });
    }
    if let Some((i, p)) = candidate
        .iter()
        .enumerate()
        .find(|(_, &p)| !(p > 0.0 && p <= 1.0))
    {
        return Err(Error::InfeasibleCandidate(format!(
            "π_{} = {p} outside (0, 1]",
            i + 1
        )));
    }
    let spent: f64 = candidate.iter().sum();
    if spent > budget * (1.0 + 1e-12) {
        return Err(Error::InfeasibleCandidate(format!(
            "Σπ = {spent} exceeds budget {budget}"
        )));
    }

    let objective = |pi: &[f64]| -> f64 { radii.iter().zip(pi).map(|(&r, &p)| r * r / p).sum() };
    let star = solution.pi_star.as_slice();
    let candidate_objective = objective(candidate);
    let optimal_objective = objective(star);
    let max_support_violation = radii
        .iter()
        .zip(candidate.iter().zip(star))
        .map(|(&r, (&p, &q))| {
            let lhs = r * r / p - r * r / q;
            let rhs = -solution.lambda * (p - q);
            (rhs - lhs).max(0.0)
        })
        .fold(0.0, f64::max);
    Ok(KktCertificate {
        candidate_objective,
        optimal_objective,
        max_support_violation,
        certified: candidate_objective >= optimal_objective - tol,
    })
}

pub fn kkt_check(radii: &[f64], budget: f64, candidate: &[f64], tol: f64) -> Result<bool> {
    Ok(kkt_certificate(radii, budget, candidate, tol)?.certified)
}
