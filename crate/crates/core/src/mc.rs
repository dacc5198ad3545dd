//! Seeded Monte-Carlo estimation of bias and mean squared error.
//!
//! Replicate `k` draws its sample from stream `k` of the run seed, so serial
//! and parallel runs see identical samples. Replicate results are reduced in
//! stream order, which keeps the floating-point sums bit-identical regardless
//! of how work was scheduled.

use rayon::prelude::*;
use serde::Serialize;

use crate::allocator::solve_waterfill;
use crate::designs::{Design, InclusionProbabilities};
use crate::error::{Error, Result};
use crate::estimators::{exact_risk_difference, DifferenceEstimator, Estimator};
use crate::popmodel::{OutcomeVector, PopulationBounds};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub replicates: u64,
    pub empirical_mean: f64,
    pub empirical_mse: f64,
    pub mean_std_error: f64,
    pub mse_std_error: f64,
    pub seed: u64,
    /// Streams `0..streams` were consumed, one per replicate.
    pub streams: u64,
}

fn mean_and_std_error(values: impl Iterator<Item = f64> + Clone, count: u64) -> (f64, f64) {
    let n = count as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Empirical mean and MSE of `estimator` over `reps` independent draws from `design`.
pub fn simulate<E: Estimator + ?Sized>(
    design: &Design,
    estimator: &E,
    y: &OutcomeVector,
    reps: u64,
    seed: u64,
    execution: Execution,
) -> Result<SimulationResult> {
    if reps < 2 {
        return Err(Error::TooFewReplicates(reps));
    }
    let units = design.population();
    for got in [y.len(), estimator.population()] {
        if got != units {
            return Err(Error::DimensionMismatch { expected: units, got });
        }
    }
    let target = y.total();
    let values = y.values();
    let replicate = |stream: u64| -> (f64, f64) {
        let sample = design.draw_stream(seed, stream);
        let estimate = estimator.estimate_indexed(&sample, values);
        let err = estimate - target;
        (estimate, err * err)
    };
    let outcomes: Vec<(f64, f64)> = match execution {
        Execution::Serial => (0..reps).map(replicate).collect(),
        Execution::Parallel => (0..reps).into_par_iter().map(replicate).collect(),
    };
    let (empirical_mean, mean_std_error) = mean_and_std_error(outcomes.iter().map(|o| o.0), reps);
    let (empirical_mse, mse_std_error) = mean_and_std_error(outcomes.iter().map(|o| o.1), reps);
    Ok(SimulationResult {
        replicates: reps,
        empirical_mean,
        empirical_mse,
        mean_std_error,
        mse_std_error,
        seed,
        streams: reps,
    })
}

/// A (design, estimator) pair under an expected-size budget `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Poisson(π*) with the midpoint-differenced estimator.
    Minimax,
    /// Poisson(n/N) with the midpoint-differenced estimator.
    UniformPoisson,
    /// SRSWOR of size round(n) with the midpoint-differenced estimator.
    Srswor,
    /// Poisson(π*) with the plain Horvitz–Thompson estimator.
    MinimaxPlainHt,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Minimax,
        Strategy::UniformPoisson,
        Strategy::Srswor,
        Strategy::MinimaxPlainHt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Minimax => "minimax",
            Strategy::UniformPoisson => "uniform-poisson",
            Strategy::Srswor => "srswor",
            Strategy::MinimaxPlainHt => "minimax-plain-ht",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

/// The design and estimator a strategy uses, plus the SRSWOR size when relevant.
pub struct StrategySetup {
    pub design: Design,
    pub estimator: DifferenceEstimator,
    pub srswor_size: Option<usize>,
}

/// SRSWOR size for a real budget: nearest integer, kept within `1..=N`.
pub fn srswor_size(budget: f64, units: usize) -> usize {
    (budget.round() as usize).clamp(1, units)
}

pub fn strategy_setup(strategy: Strategy, bounds: &PopulationBounds, budget: f64) -> Result<StrategySetup> {
    bounds.require_nondegenerate()?;
    let units = bounds.len();
    let minimax = || solve_waterfill(bounds.radii(), budget).map(|s| s.pi_star);
    let (design, estimator, size) = match strategy {
        Strategy::Minimax => {
            let pi = minimax()?;
            (Design::poisson(pi.clone())?, DifferenceEstimator::midpoint(bounds, &pi)?, None)
        }
        Strategy::UniformPoisson => {
            if !(budget > 0.0 && budget <= units as f64) {
                return Err(Error::BudgetOutOfRange { budget, units });
            }
            let pi = InclusionProbabilities::uniform(units, budget)?;
            (Design::poisson(pi.clone())?, DifferenceEstimator::midpoint(bounds, &pi)?, None)
        }
        Strategy::Srswor => {
            if !(budget > 0.0 && budget <= units as f64) {
                return Err(Error::BudgetOutOfRange { budget, units });
            }
            let k = srswor_size(budget, units);
            let design = Design::srswor(units, k)?;
            let estimator = DifferenceEstimator::midpoint(bounds, &design.first_order())?;
            (design, estimator, Some(k))
        }
        Strategy::MinimaxPlainHt => {
            let pi = minimax()?;
            (Design::poisson(pi.clone())?, DifferenceEstimator::plain(&pi)?, None)
        }
    };
    Ok(StrategySetup {
        design,
        estimator,
        srswor_size: size,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub strategy: Strategy,
    pub y_index: usize,
    /// Closed-form risk of this strategy at this `y`.
    pub exact_risk: f64,
    #[serde(flatten)]
    pub result: SimulationResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategySummary {
    pub strategy: Strategy,
    pub worst_mse: f64,
    pub worst_mse_std_error: f64,
    pub worst_y_index: usize,
    pub worst_exact_risk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyComparison {
    pub budget: f64,
    pub rows: Vec<ComparisonRow>,
    pub summaries: Vec<StrategySummary>,
    /// Size used by the SRSWOR baseline, if run.
    pub srswor_size: Option<usize>,
    /// True when the SRSWOR size differs from the budget.
    pub srswor_rounded: bool,
    /// Indices into `y_list` of outcome vectors outside the bounds.
    pub outside_bounds: Vec<usize>,
    /// Minimax worst-case MSE is within 4 combined standard errors of, or
    /// below, every other strategy's worst case. `None` if minimax was not run.
    pub minimax_not_beaten: Option<bool>,
}

/// Empirical head-to-head of the minimax strategy against the baselines.
pub fn compare_strategies(
    bounds: &PopulationBounds,
    budget: f64,
    y_list: &[OutcomeVector],
    reps: u64,
    seed: u64,
    execution: Execution,
) -> Result<StrategyComparison> {
    compare_selected(bounds, budget, y_list, reps, seed, execution, &Strategy::ALL)
}

/// [`compare_strategies`] restricted to `strategies`. Every strategy and
/// outcome vector uses the same seed.
pub fn compare_selected(
    bounds: &PopulationBounds,
    budget: f64,
    y_list: &[OutcomeVector],
    reps: u64,
    seed: u64,
    execution: Execution,
    strategies: &[Strategy],
) -> Result<StrategyComparison> {
    let tol = bounds.default_tolerance();
    let mut outside_bounds = Vec::new();
    for (k, y) in y_list.iter().enumerate() {
        if !bounds.contains(y, tol)? {
            outside_bounds.push(k);
        }
    }

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    let mut srswor = None;
    for &strategy in strategies {
        let setup = strategy_setup(strategy, bounds, budget)?;
        if setup.srswor_size.is_some() {
            srswor = setup.srswor_size;
        }
        let second = setup.design.second_order();
        let pi = setup.design.first_order();
        let mut worst: Option<StrategySummary> = None;
        for (k, y) in y_list.iter().enumerate() {
            let result = simulate(&setup.design, &setup.estimator, y, reps, seed, execution)?;
            let exact_risk = exact_risk_difference(setup.estimator.centers(), &pi, &second, y)?;
            if worst.as_ref().is_none_or(|w| result.empirical_mse > w.worst_mse) {
                worst = Some(StrategySummary {
                    strategy,
                    worst_mse: result.empirical_mse,
                    worst_mse_std_error: result.mse_std_error,
                    worst_y_index: k,
                    worst_exact_risk: f64::NAN,
                });
            }
            rows.push(ComparisonRow {
                strategy,
                y_index: k,
                exact_risk,
                result,
            });
        }
        if let Some(mut w) = worst {
            w.worst_exact_risk = rows
                .iter()
                .filter(|r| r.strategy == strategy)
                .map(|r| r.exact_risk)
                .fold(f64::NEG_INFINITY, f64::max);
            summaries.push(w);
        }
    }

    let minimax_not_beaten = summaries
        .iter()
        .find(|s| s.strategy == Strategy::Minimax)
        .map(|m| {
            summaries.iter().filter(|s| s.strategy != Strategy::Minimax).all(|s| {
                let sigma = m.worst_mse_std_error.hypot(s.worst_mse_std_error);
                m.worst_mse <= s.worst_mse + 4.0 * sigma
            })
        });

    Ok(StrategyComparison {
        budget,
        rows,
        summaries,
        srswor_rounded: srswor.is_some_and(|k| k as f64 != budget),
        srswor_size: srswor,
        outside_bounds,
        minimax_not_beaten,
    })
}
