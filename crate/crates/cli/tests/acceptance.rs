//! End-to-end acceptance run: every criterion prints one PASS/FAIL line and
//! the process fails if any criterion does.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use clap::Parser;
use minimax_sampler::allocator::solve_waterfill;
use minimax_sampler::designs::{Design, InclusionProbabilities, Sample};
use minimax_sampler::estimators::{affine_transform, midpoint_ht, DifferenceEstimator};
use minimax_sampler::mc::{simulate, Execution};
use minimax_sampler::oracle::suite::{random_instance, random_point, Instance, InstanceKind};
use minimax_sampler::oracle::{
    certify, product_prior_bayes_risk, sharpness_audit, Certificate, OracleLimits, ProductPrior,
};
use minimax_sampler::popmodel::{PopulationBounds, SignVector};
use minimax_sampler::rng::stream_rng;
use minimax_sampler_cli::{run, RunConfig};
use rand::Rng;

const TOL: f64 = 1e-9;
const SUITE_SIZE: usize = 120;
const CHALLENGERS: usize = 10;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Random instances with `N ∈ 2..=6` cycling through every design family,
/// each certified against the midpoint, plain and ten random-center estimators.
struct Suite {
    cases: Vec<(Instance, Certificate)>,
    elapsed: Duration,
}

fn build_suite() -> Suite {
    let start = Instant::now();
    let mut rng = stream_rng(20_240_601, 0);
    let cases = (0..SUITE_SIZE)
        .map(|k| {
            let kind = InstanceKind::ALL[k % InstanceKind::ALL.len()];
            let units = rng.gen_range(2..=6);
            let instance = random_instance(&mut rng, kind, units).expect("instance");
            let centers: Vec<Vec<f64>> = (0..CHALLENGERS).map(|_| random_point(&mut rng, &instance.bounds)).collect();
            let certificate =
                certify(&instance.design, &instance.bounds, &centers, TOL, OracleLimits::default()).expect("certify");
            (instance, certificate)
        })
        .collect();
    Suite {
        cases,
        elapsed: start.elapsed(),
    }
}

fn lower_bound(suite: &Suite) -> Check {
    let mut worst_gap = f64::INFINITY;
    let mut worst_bias: f64 = 0.0;
    let mut tested = 0;
    for (_, c) in &suite.cases {
        for e in &c.estimators {
            worst_gap = worst_gap.min(e.mean_vertex_risk - c.sharpness.d_pi);
            worst_bias = worst_bias.max(e.max_abs_bias / c.sharpness.d_pi.max(1.0));
            tested += 1;
        }
    }
    let seconds = suite.elapsed.as_secs_f64();
    ensure(
        worst_gap >= -TOL && worst_bias <= TOL && seconds < 60.0,
        format!(
            "{} instances, {tested} estimator checks, min(mean vertex risk - D) = {worst_gap:.3e}, \
             max relative bias = {worst_bias:.1e}, {seconds:.1}s",
            suite.cases.len()
        ),
    )
}

fn unit_square() -> PopulationBounds {
    PopulationBounds::from_midpoints_radii(&[0.0, 0.0], &[1.0, 1.0]).unwrap()
}

fn sharpness(suite: &Suite) -> Check {
    let mut counterexamples = 0;
    let (mut attaining, mut dependent) = (0, 0);
    for (_, c) in &suite.cases {
        let s = &c.sharpness;
        let attains = (s.sup_vertex_risk - s.d_pi).abs() <= TOL;
        let independent = s.delta_max <= TOL;
        counterexamples += (attains != independent) as usize;
        attaining += attains as usize;
        dependent += !independent as usize;
    }
    let srs = sharpness_audit(&Design::srswor(2, 1).unwrap(), &unit_square(), TOL, OracleLimits::default()).unwrap();
    let delta12 = Design::srswor(2, 1).unwrap().second_order().delta(0, 1);
    let worked = (srs.sup_vertex_risk - 4.0).abs() <= 1e-12
        && (srs.d_pi - 2.0).abs() <= 1e-12
        && (delta12 + 0.25).abs() <= 1e-12;
    ensure(
        counterexamples == 0 && worked && attaining > 0 && dependent > 0,
        format!(
            "{counterexamples} counterexamples ({attaining} attaining, {dependent} dependent); \
             SRSWOR(2,1): sup = {}, D = {}, Δ12 = {delta12}",
            srs.sup_vertex_risk, srs.d_pi
        ),
    )
}

fn walsh(suite: &Suite) -> Check {
    let pair = suite.cases.iter().map(|(_, c)| c.sharpness.walsh_residual_max).fold(0.0, f64::max);
    let constant = suite.cases.iter().map(|(_, c)| c.sharpness.walsh_constant_residual).fold(0.0, f64::max);
    ensure(
        pair <= TOL && constant <= TOL,
        format!("max pair residual = {pair:.3e}, max constant residual = {constant:.3e}"),
    )
}

/// Exact minimum of `D_π` over the grid `π_i ∈ {1/50, ..., 50/50}` with
/// `Σ π_i <= n`. `D_π` is separable, so a knapsack recursion over the
/// integer grid sum visits the same feasible set as the full product grid.
fn grid_minimum(radii: &[f64], budget: f64) -> f64 {
    const STEPS: usize = 50;
    let cap = ((budget * STEPS as f64) + 1e-9).floor() as usize;
    let mut best = vec![0.0f64; cap + 1];
    for &r in radii {
        let mut next = vec![f64::INFINITY; cap + 1];
        for (used, &so_far) in best.iter().enumerate() {
            if !so_far.is_finite() {
                continue;
            }
            for k in 1..=STEPS {
                let total = used + k;
                if total > cap {
                    break;
                }
                let p = k as f64 / STEPS as f64;
                let value = so_far + r * r * (1.0 - p) / p;
                if value < next[total] {
                    next[total] = value;
                }
            }
        }
        best = next;
    }
    best.into_iter().fold(f64::INFINITY, f64::min)
}

/// Direct product-grid search, used to cross-check [`grid_minimum`].
fn grid_minimum_brute(radii: &[f64], budget: f64) -> f64 {
    let grid: Vec<f64> = (1..=50).map(|k| k as f64 / 50.0).collect();
    let mut best = f64::INFINITY;
    let mut idx = vec![0usize; radii.len()];
    loop {
        let pi: Vec<f64> = idx.iter().map(|&k| grid[k]).collect();
        let used: usize = idx.iter().map(|k| k + 1).sum();
        if used as f64 <= budget * 50.0 + 1e-9 {
            let v: f64 = radii.iter().zip(&pi).map(|(r, p)| r * r * (1.0 - p) / p).sum();
            best = best.min(v);
        }
        let mut i = 0;
        loop {
            if i == idx.len() {
                return best;
            }
            idx[i] += 1;
            if idx[i] < grid.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

fn waterfill_optimality() -> Check {
    let mut rng = stream_rng(77, 0);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_budget_error: f64 = 0.0;
    let mut grid_mismatch: f64 = 0.0;
    let instances = 150;
    for k in 0..instances {
        let units = rng.gen_range(1..=5);
        let radii: Vec<f64> = (0..units).map(|_| rng.gen_range(0.05..4.0)).collect();
        let budget = if k % 15 == 0 { units as f64 } else { rng.gen_range(0.02 * units as f64..=units as f64) };
        let s = solve_waterfill(&radii, budget).unwrap();
        let grid = grid_minimum(&radii, budget);
        assert!(grid.is_finite(), "grid has a feasible point");
        if units <= 3 {
            grid_mismatch = grid_mismatch.max((grid - grid_minimum_brute(&radii, budget)).abs() / grid.max(1.0));
        }
        worst_excess = worst_excess.max(s.v_n - grid);
        worst_budget_error = worst_budget_error.max((s.pi_star.sum() - budget).abs());
    }
    let worked = solve_waterfill(&[0.5, 1.0, 1.5], 2.0).unwrap();
    let pi = worked.pi_star.as_slice();
    let worked_ok = (pi[0] - 1.0 / 3.0).abs() <= 1e-12
        && (pi[1] - 2.0 / 3.0).abs() <= 1e-12
        && (pi[2] - 1.0).abs() <= 1e-12
        && (worked.v_n - 1.0).abs() <= 1e-12;
    ensure(
        worst_excess <= TOL && worst_budget_error <= TOL && worked_ok && grid_mismatch <= 1e-12,
        format!(
            "{instances} instances, max(v_n - grid min) = {worst_excess:.3e}, max |Σπ - n| = {worst_budget_error:.1e}; \
             worked instance π* = ({:.15}, {:.15}, {}), v_n = {:.15}",
            pi[0], pi[1], pi[2], worked.v_n
        ),
    )
}

fn strategy_attainment() -> Check {
    let mut rng = stream_rng(4242, 0);
    let mut worst_exact: f64 = 0.0;
    for units in 2..=12 {
        for _ in 0..2 {
            let radii: Vec<f64> = (0..units).map(|_| rng.gen_range(0.1..3.0)).collect();
            let midpoints: Vec<f64> = (0..units).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let bounds = PopulationBounds::from_midpoints_radii(&midpoints, &radii).unwrap();
            let budget = rng.gen_range(0.5..units as f64);
            let s = solve_waterfill(&radii, budget).unwrap();
            let design = Design::poisson(s.pi_star.clone()).unwrap();
            let verdict = sharpness_audit(&design, &bounds, TOL, OracleLimits::default()).unwrap();
            worst_exact = worst_exact.max((verdict.sup_vertex_risk - s.v_n).abs());
        }
    }

    let start = Instant::now();
    let units = 50;
    let radii: Vec<f64> = (0..units).map(|_| rng.gen_range(0.1..3.0)).collect();
    let midpoints: Vec<f64> = (0..units).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let bounds = PopulationBounds::from_midpoints_radii(&midpoints, &radii).unwrap();
    let s = solve_waterfill(&radii, 15.0).unwrap();
    let design = Design::poisson(s.pi_star.clone()).unwrap();
    let estimator = DifferenceEstimator::midpoint(&bounds, &s.pi_star).unwrap();
    let mut worst_z: f64 = 0.0;
    for k in 0..20u64 {
        let signs = (0..units).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
        let y = bounds.vertex(&SignVector::new(signs).unwrap()).unwrap();
        let r = simulate(&design, &estimator, &y, 1_000_000, 1000 + k, Execution::Parallel).unwrap();
        worst_z = worst_z.max((r.empirical_mse - s.v_n).abs() / r.mse_std_error);
    }
    let seconds = start.elapsed().as_secs_f64();
    ensure(
        worst_exact <= TOL && worst_z <= 4.0 && seconds < 300.0,
        format!(
            "N ≤ 12 max |sup risk - V| = {worst_exact:.3e}; N = 50, 20 vertices × 1e6 reps: \
             max |MSE - V|/se = {worst_z:.2} (V = {:.6}), {seconds:.1}s",
            s.v_n
        ),
    )
}

fn bayes_identity(suite: &Suite) -> Check {
    let mut worst: f64 = 0.0;
    let (mut independent, mut dependent) = (0, 0);
    let mut beaten = 0;
    for (_, c) in &suite.cases {
        worst = worst.max(c.bayes_identity_residual());
        if c.sharpness.delta_max <= TOL {
            independent += 1;
        } else {
            dependent += 1;
        }
        beaten += c.estimators.iter().filter(|e| !e.midpoint_not_beaten).count();
    }
    // The vertex prior as well, on a dependent and an independent design.
    let bounds = PopulationBounds::from_midpoints_radii(&[1.0, -2.0, 0.5], &[0.5, 1.0, 2.0]).unwrap();
    let vertex = ProductPrior::vertex(&bounds).unwrap();
    for design in [
        Design::srswor(3, 2).unwrap(),
        Design::poisson(InclusionProbabilities::new(vec![0.3, 0.6, 0.9]).unwrap()).unwrap(),
    ] {
        let pi = design.first_order();
        let est = DifferenceEstimator::midpoint(&bounds, &pi).unwrap();
        let risk = product_prior_bayes_risk(&design, &est, &vertex, OracleLimits::default()).unwrap();
        worst = worst.max((risk - vertex.midpoint_bayes_risk(&pi)).abs());
    }
    ensure(
        worst <= TOL && independent > 0 && dependent > 0 && beaten == 0,
        format!(
            "max |Bayes risk - Σσ²(1/π-1)| = {worst:.3e} over {independent} independent and {dependent} dependent \
             designs; {beaten} challengers beat the midpoint estimator"
        ),
    )
}

fn equivariance() -> Check {
    let mut rng = stream_rng(31_337, 0);
    let mut worst: f64 = 0.0;
    let triples = 1000;
    for _ in 0..triples {
        let units = rng.gen_range(1..=8);
        let midpoints: Vec<f64> = (0..units).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let radii: Vec<f64> = (0..units).map(|_| rng.gen_range(0.1..5.0)).collect();
        let bounds = PopulationBounds::from_midpoints_radii(&midpoints, &radii).unwrap();
        let pi = InclusionProbabilities::new((0..units).map(|_| rng.gen_range(0.1..=1.0)).collect()).unwrap();
        let scale = rng.gen_range(0.1..10.0);
        let shifts: Vec<f64> = (0..units).map(|_| rng.gen_range(-10.0..=10.0)).collect();
        let y = random_point(&mut rng, &bounds);
        let indices: Vec<usize> = (0..units).filter(|_| rng.gen_bool(0.5)).collect();

        let original = midpoint_ht(&bounds, &pi, &Sample::from_outcomes(&indices, &y).unwrap()).unwrap();
        let moved = affine_transform(&bounds, scale, &shifts).unwrap();
        let y_moved: Vec<f64> = y.iter().zip(&shifts).map(|(v, c)| scale * v + c).collect();
        let lhs = midpoint_ht(&moved, &pi, &Sample::from_outcomes(&indices, &y_moved).unwrap()).unwrap();
        let rhs = scale * original + shifts.iter().sum::<f64>();
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0));
    }
    ensure(
        worst <= 1e-12,
        format!("{triples} (λ, c, sample) triples, max relative deviation = {worst:.3e}"),
    )
}

fn simulate_report(bounds: &Path, serial: bool) -> String {
    let mut args = vec![
        "minimax-sampler",
        "simulate",
        "--bounds",
        bounds.to_str().unwrap(),
        "--budget",
        "3.5",
        "--reps",
        "20000",
        "--seed",
        "11",
    ];
    if serial {
        args.push("--serial");
    }
    let outcome = run(&RunConfig::parse_from(args));
    assert_eq!(outcome.exit_code, 0, "{:?}", outcome.diagnostics);
    outcome.rendered.unwrap()
}

fn reproducibility() -> Check {
    let dir = tempfile::TempDir::new().unwrap();
    let bounds = dir.path().join("pop.csv");
    std::fs::write(
        &bounds,
        "id,a,b\nu1,0,1\nu2,-2,2\nu3,1,4\nu4,0,0.5\nu5,-1,3\nu6,2,2.25\nu7,-5,-1\nu8,0,6\n",
    )
    .unwrap();
    let first = simulate_report(&bounds, false);
    let second = simulate_report(&bounds, false);
    let serial = simulate_report(&bounds, true);
    let binary = std::process::Command::new(env!("CARGO_BIN_EXE_minimax-sampler"))
        .args(["simulate", "--bounds", bounds.to_str().unwrap(), "--budget", "3.5", "--reps", "20000", "--seed", "11"])
        .output()
        .unwrap()
        .stdout;
    ensure(
        first == second && first == serial && first.as_bytes() == binary.as_slice(),
        format!(
            "two parallel runs, a serial run and a separate process produced {} reports of {} bytes",
            if first == second && first == serial { "identical" } else { "differing" },
            first.len()
        ),
    )
}

fn report(number: usize, name: &str, check: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
        let message = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".to_string());
        Err(format!("panic: {message}"))
    });
    let (tag, detail, ok) = match outcome {
        Ok(d) => ("PASS", d, true),
        Err(d) => ("FAIL", d, false),
    };
    println!("[{tag}] {number}. {name}: {detail} ({:.1}s)", start.elapsed().as_secs_f64());
    ok
}

fn main() {
    println!("acceptance: running 8 criteria");
    let suite = build_suite();
    let results = [
        report(1, "lower-bound certificate", || lower_bound(&suite)),
        report(2, "sharpness equivalence", || sharpness(&suite)),
        report(3, "walsh recovery", || walsh(&suite)),
        report(4, "water-fill optimality", waterfill_optimality),
        report(5, "strategy attainment", strategy_attainment),
        report(6, "bayes-risk identity", || bayes_identity(&suite)),
        report(7, "equivariance", equivariance),
        report(8, "reproducibility", reproducibility),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
