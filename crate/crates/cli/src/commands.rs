//! Subcommand execution: load inputs, call the library, assemble the results payload.

use minimax_sampler::allocator::solve_waterfill;
use minimax_sampler::designs::Sample;
use minimax_sampler::estimators::DifferenceEstimator;
use minimax_sampler::mc::{compare_selected, Execution, Strategy};
use minimax_sampler::oracle::suite::{random_instance, random_point, InstanceKind};
use minimax_sampler::oracle::{certify, sharpness_audit, OracleLimits};
use minimax_sampler::popmodel::{OutcomeVector, PopulationBounds, SignVector};
use minimax_sampler::rng::stream_rng;
use minimax_sampler::Error as CoreError;
use rand::Rng;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::inputs::{self, load_population, InputSet, Population};
use crate::report::Report;
use crate::{Command, RunConfig};

/// Populations up to this size default to simulating at every vertex.
const ALL_VERTICES_MAX_UNITS: usize = 6;
/// Number of random vertices simulated by default for larger populations.
const DEFAULT_RANDOM_VERTICES: usize = 16;
/// Stream reserved for auxiliary draws so replicate streams `0..reps` stay untouched.
const AUX_STREAM: u64 = u64::MAX;

fn to_value<T: serde::Serialize>(value: &T) -> Result<Value, CliError> {
    serde_json::to_value(value).map_err(|e| CliError::Internal(e.to_string()))
}

fn ids_at(bounds: &PopulationBounds, indices: &[usize]) -> Vec<String> {
    let ids: Vec<&str> = bounds.ids().collect();
    indices.iter().map(|&i| ids[i].to_string()).collect()
}

fn stripped_fields(population: &Population, results: &mut Value) {
    if let Some(s) = &population.stripped {
        results["stripped"] = json!(s.removed_ids);
        results["known_total"] = json!(s.known_total);
    }
}

fn limits(max_units: Option<usize>, max_support: Option<usize>) -> OracleLimits {
    let d = OracleLimits::default();
    OracleLimits::lowered(max_units.unwrap_or(d.max_units), max_support.unwrap_or(d.max_support))
}

pub fn execute(config: &RunConfig, mut warnings: Vec<String>) -> Result<Report, CliError> {
    let mut inputs = InputSet::default();
    let strip = config.strip_degenerate;
    let results = match &config.command {
        Command::Design { bounds, budget } => {
            let population = load_population(&mut inputs, bounds, strip)?;
            let b = &population.bounds;
            b.require_nondegenerate()?;
            let solution = solve_waterfill(b.radii(), *budget)?;
            let mut results = json!({
                "budget": solution.budget,
                "c": solution.c,
                "capped": ids_at(b, &solution.capped),
                "census": solution.is_census(),
                "expected_size": solution.expected_size(),
                "ids": b.ids().collect::<Vec<_>>(),
                "lambda": solution.lambda,
                "pi_star": solution.pi_star.as_slice(),
                "v_n": solution.v_n,
            });
            stripped_fields(&population, &mut results);
            results
        }
        Command::Estimate {
            bounds,
            sample,
            pi_from,
            pi,
        } => estimate(&mut inputs, strip, bounds, sample.as_deref(), pi_from.as_deref(), pi.as_deref(), &mut warnings)?,
        Command::Audit { bounds, design, tol } => {
            let population = load_population(&mut inputs, bounds, strip)?;
            let b = &population.bounds;
            let design = inputs::build_design(design, b, &mut inputs)?;
            let verdict = sharpness_audit(&design, b, *tol, OracleLimits::default())?;
            let second = design.second_order();
            let mut results = to_value(&verdict)?;
            results["design"] = json!(design.label());
            results["expected_size"] = json!(design.expected_size());
            results["ids"] = json!(b.ids().collect::<Vec<_>>());
            results["pi"] = json!(design.first_order().as_slice());
            results["pi2"] = json!(second.joint_rows());
            results["tolerance"] = json!(tol);
            stripped_fields(&population, &mut results);
            results
        }
        Command::Oracle {
            bounds,
            design,
            suite,
            suite_max_units,
            challengers,
            seed,
            tol,
            max_units,
            max_support,
        } => {
            let limits = limits(*max_units, *max_support);
            match (suite, bounds) {
                (Some(count), _) => oracle_suite(*count, *suite_max_units, *challengers, *seed, *tol, limits)?,
                (None, Some(path)) => {
                    let population = load_population(&mut inputs, path, strip)?;
                    let b = &population.bounds;
                    let design = inputs::build_design(design, b, &mut inputs)?;
                    let mut rng = stream_rng(*seed, AUX_STREAM);
                    let centers: Vec<Vec<f64>> = (0..*challengers).map(|_| random_point(&mut rng, b)).collect();
                    let certificate = certify(&design, b, &centers, *tol, limits)?;
                    let mut results = to_value(&certificate)?;
                    results["bayes_identity_residual"] = json!(certificate.bayes_identity_residual());
                    results["design"] = json!(design.label());
                    results["passed"] = json!(certificate.passed(*tol));
                    results["seed"] = json!(seed);
                    results["tolerance"] = json!(tol);
                    stripped_fields(&population, &mut results);
                    results
                }
                (None, None) => {
                    return Err(CliError::validation("MissingInput", "oracle needs --bounds or --suite"))
                }
            }
        }
        Command::Simulate {
            bounds,
            budget,
            reps,
            seed,
            strategy,
            y_file,
            serial,
        } => {
            let population = load_population(&mut inputs, bounds, strip)?;
            let b = &population.bounds;
            let strategies = parse_strategies(strategy)?;
            let (y_list, y_source) = match y_file {
                Some(path) => (inputs::read_y_file(&mut inputs, path, b.len())?, "y-file"),
                None => default_outcomes(&population, *seed)?,
            };
            let execution = if *serial { Execution::Serial } else { Execution::Parallel };
            let comparison = compare_selected(b, *budget, &y_list, *reps, *seed, execution, &strategies)?;
            if comparison.srswor_rounded {
                warnings.push(format!(
                    "srswor baseline uses size {} for budget {budget}",
                    comparison.srswor_size.unwrap_or_default()
                ));
            }
            for &k in &comparison.outside_bounds {
                warnings.push(format!("outcome vector {k} lies outside the bounds"));
            }
            let mut results = to_value(&comparison)?;
            results["reps"] = json!(reps);
            results["seed"] = json!(seed);
            results["y_count"] = json!(y_list.len());
            results["y_source"] = json!(y_source);
            stripped_fields(&population, &mut results);
            results
        }
    };
    Ok(Report::new(config.command.name(), inputs.digest(), results, warnings))
}

#[allow(clippy::too_many_arguments)]
fn estimate(
    inputs: &mut InputSet,
    strip: bool,
    bounds_path: &std::path::Path,
    sample_path: Option<&std::path::Path>,
    pi_from: Option<&std::path::Path>,
    pi_csv: Option<&std::path::Path>,
    warnings: &mut Vec<String>,
) -> Result<Value, CliError> {
    let population = load_population(inputs, bounds_path, strip)?;
    let b = &population.bounds;
    let pi = match (pi_from, pi_csv) {
        (Some(path), _) => inputs::read_pi_report(inputs, path, b)?,
        (None, Some(path)) => inputs::read_pi_csv(inputs, path, b)?,
        (None, None) => return Err(CliError::validation("MissingProbability", "estimate needs --pi-from or --pi")),
    };
    let rows = match sample_path {
        Some(path) => inputs::read_sample_file(inputs, path, &population.table)?,
        None => population.table.observed_indices(),
    };
    let mut indices = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len());
    for &row in &rows {
        let Some(i) = population.working_index(row) else { continue };
        let id = &population.table.bounds.units()[row].id;
        let y = population.table.observed[row].ok_or_else(|| {
            CliError::validation("MissingValue", format!("sampled unit `{id}` has no observed y value"))
        })?;
        indices.push(i);
        values.push(y);
    }
    if indices.is_empty() {
        warnings.push("empty sample".to_string());
    }
    let sample = Sample::new(indices, values)?;
    let estimator = DifferenceEstimator::midpoint(b, &pi)?;
    let ranged = estimator.estimate_with_range(b, &sample)?;
    let known = population.known_total();
    let mut results = json!({
        "estimate": ranged.estimate + known,
        "in_range": ranged.in_range,
        "midpoint_total": b.midpoint_total() + known,
        "pi": pi.as_slice(),
        "sample_size": sample.len(),
        "sampled": ids_at(b, sample.indices()),
    });
    stripped_fields(&population, &mut results);
    Ok(results)
}

fn parse_strategies(names: &[String]) -> Result<Vec<Strategy>, CliError> {
    let mut out = Vec::new();
    for name in names {
        let chosen: Vec<Strategy> = if name == "all" {
            Strategy::ALL.to_vec()
        } else {
            vec![Strategy::parse(name)
                .ok_or_else(|| CliError::validation("UnknownStrategy", format!("unknown strategy `{name}`")))?]
        };
        for s in chosen {
            if !out.contains(&s) {
                out.push(s);
            }
        }
    }
    Ok(out)
}

/// Observed values when every unit has one; otherwise every vertex for small
/// populations, or random vertices drawn from an auxiliary stream.
fn default_outcomes(population: &Population, seed: u64) -> Result<(Vec<OutcomeVector>, &'static str), CliError> {
    let b = &population.bounds;
    let observed = population.observed();
    if observed.iter().all(Option::is_some) {
        return Ok((vec![OutcomeVector(observed.into_iter().flatten().collect())], "observed"));
    }
    let n = b.len();
    if n <= ALL_VERTICES_MAX_UNITS {
        let all = (0..1u64 << n)
            .map(|mask| b.vertex(&SignVector::from_mask(mask, n)))
            .collect::<Result<Vec<_>, CoreError>>()?;
        return Ok((all, "all-vertices"));
    }
    let mut rng = stream_rng(seed, AUX_STREAM);
    let random = (0..DEFAULT_RANDOM_VERTICES)
        .map(|_| {
            let signs = (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
            b.vertex(&SignVector::new(signs)?)
        })
        .collect::<Result<Vec<_>, CoreError>>()?;
    Ok((random, "random-vertices"))
}

fn oracle_suite(
    count: usize,
    max_units: usize,
    challengers: usize,
    seed: u64,
    tol: f64,
    limits: OracleLimits,
) -> Result<Value, CliError> {
    let mut rng = stream_rng(seed, 0);
    let mut instances = Vec::with_capacity(count);
    let (mut passed, mut equivalence_failures, mut bound_failures) = (0usize, 0usize, 0usize);
    for k in 0..count {
        let kind = InstanceKind::ALL[k % InstanceKind::ALL.len()];
        let units = rng.gen_range(2..=max_units);
        let instance = random_instance(&mut rng, kind, units)?;
        let centers: Vec<Vec<f64>> = (0..challengers).map(|_| random_point(&mut rng, &instance.bounds)).collect();
        let c = certify(&instance.design, &instance.bounds, &centers, tol, limits)?;
        let ok = c.passed(tol);
        passed += ok as usize;
        equivalence_failures += !c.sharpness.equivalence_holds as usize;
        bound_failures += !c.lower_bound_holds as usize;
        instances.push(json!({
            "attains": c.sharpness.attains,
            "bayes_identity_residual": c.bayes_identity_residual(),
            "d_pi": c.sharpness.d_pi,
            "delta_max": c.sharpness.delta_max,
            "index": k,
            "kind": kind.name(),
            "lower_bound_holds": c.lower_bound_holds,
            "mean_vertex_risk": c.sharpness.mean_vertex_risk,
            "pairwise_independent": c.sharpness.pairwise_independent,
            "passed": ok,
            "sup_vertex_risk": c.sharpness.sup_vertex_risk,
            "units": units,
            "walsh_residual_max": c.sharpness.walsh_residual_max,
        }));
    }
    Ok(json!({
        "equivalence_counterexamples": equivalence_failures,
        "instances": instances,
        "lower_bound_violations": bound_failures,
        "passed": passed,
        "seed": seed,
        "suite_size": count,
        "tolerance": tol,
    }))
}
