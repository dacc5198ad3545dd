//! Browser bindings for the static demo page in `www/`.
//!
//! Each exported function takes plain numbers or a JSON array of radii and
//! returns a JSON string. Populations are centred at zero, so unit `i` has
//! bounds `[-r_i, r_i]`; the risk quantities only depend on the radii.
//! The `*_json` functions hold the logic and are tested natively.

use minimax_sampler::allocator::solve_waterfill;
use minimax_sampler::designs::Design;
use minimax_sampler::mc::{compare_selected, Execution, Strategy};
use minimax_sampler::oracle::{sharpness_audit, OracleLimits, DEFAULT_TOLERANCE};
use minimax_sampler::popmodel::{PopulationBounds, SignVector};
use minimax_sampler::rng::stream_rng;
use rand::Rng;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest population the page will enumerate vertices for.
pub const MAX_AUDIT_UNITS: usize = 12;
/// Replicate cap keeping the page responsive on one thread.
pub const MAX_REPS: u64 = 200_000;
const SIMULATED_VERTICES: usize = 4;

fn parse_radii(radii: &str) -> Result<PopulationBounds, String> {
    let radii: Vec<f64> = serde_json::from_str(radii).map_err(|e| format!("radii must be a JSON array of numbers: {e}"))?;
    let midpoints = vec![0.0; radii.len()];
    let bounds = PopulationBounds::from_midpoints_radii(&midpoints, &radii).map_err(|e| e.to_string())?;
    bounds.require_nondegenerate().map_err(|e| e.to_string())?;
    Ok(bounds)
}

fn render(value: Value) -> String {
    value.to_string()
}

/// Water-fill probabilities and minimax value for a budget.
pub fn waterfill_json(radii: &str, budget: f64) -> Result<String, String> {
    let bounds = parse_radii(radii)?;
    let s = solve_waterfill(bounds.radii(), budget).map_err(|e| e.to_string())?;
    Ok(render(json!({
        "pi_star": s.pi_star.as_slice(),
        "c": s.c,
        "lambda": s.lambda,
        "v_n": s.v_n,
        "capped": s.capped,
        "expected_size": s.expected_size(),
    })))
}

fn demo_design(bounds: &PopulationBounds, design: &str, parameter: f64) -> Result<Design, String> {
    let units = bounds.len();
    match design {
        "minimax" => {
            let s = solve_waterfill(bounds.radii(), parameter).map_err(|e| e.to_string())?;
            Design::poisson(s.pi_star).map_err(|e| e.to_string())
        }
        "srswor" => {
            if parameter.fract() != 0.0 || parameter < 1.0 {
                return Err(format!("srswor size must be a positive integer, got {parameter}"));
            }
            Design::srswor(units, parameter as usize).map_err(|e| e.to_string())
        }
        other => Err(format!("unknown design `{other}`; expected minimax or srswor")),
    }
}

/// Exact risk of the midpoint-differenced estimator at every vertex, with the
/// lower bound `D_π` and the sharpness verdict.
pub fn vertex_risk_json(radii: &str, design: &str, parameter: f64) -> Result<String, String> {
    let bounds = parse_radii(radii)?;
    if bounds.len() > MAX_AUDIT_UNITS {
        return Err(format!("vertex audit is limited to {MAX_AUDIT_UNITS} units"));
    }
    let design = demo_design(&bounds, design, parameter)?;
    let verdict = sharpness_audit(&design, &bounds, DEFAULT_TOLERANCE, OracleLimits::default()).map_err(|e| e.to_string())?;
    Ok(render(json!({
        "design": design.label(),
        "pi": design.first_order().as_slice(),
        "risks": verdict.profile.risks,
        "d_pi": verdict.d_pi,
        "sup_vertex_risk": verdict.sup_vertex_risk,
        "mean_vertex_risk": verdict.mean_vertex_risk,
        "delta_max": verdict.delta_max,
        "attains": verdict.attains,
        "walsh_residual_max": verdict.walsh_residual_max,
    })))
}

/// Monte-Carlo worst-case MSE of every strategy over a few random vertices.
pub fn simulate_json(radii: &str, budget: f64, reps: u64, seed: u64) -> Result<String, String> {
    let bounds = parse_radii(radii)?;
    let reps = reps.clamp(2, MAX_REPS);
    let n = bounds.len();
    let y_list = (0..SIMULATED_VERTICES as u64)
        .map(|k| bounds.vertex(&random_signs(seed, k, n)).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    let v_n = solve_waterfill(bounds.radii(), budget).map_err(|e| e.to_string())?.v_n;
    let cmp = compare_selected(&bounds, budget, &y_list, reps, seed, Execution::Serial, &Strategy::ALL)
        .map_err(|e| e.to_string())?;
    Ok(render(json!({
        "reps": reps,
        "v_n": v_n,
        "summaries": cmp.summaries,
        "srswor_size": cmp.srswor_size,
        "minimax_not_beaten": cmp.minimax_not_beaten,
    })))
}

/// Demo vertex `k`: signs from a stream disjoint from the replicate streams.
fn random_signs(seed: u64, k: u64, n: usize) -> SignVector {
    let mut rng = stream_rng(seed, u64::MAX - k);
    let mask = (0..n).fold(0u64, |m, i| m | (u64::from(rng.gen_bool(0.5)) << i));
    SignVector::from_mask(mask, n)
}

fn to_js(result: Result<String, String>) -> Result<String, JsValue> {
    result.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn waterfill(radii: &str, budget: f64) -> Result<String, JsValue> {
    to_js(waterfill_json(radii, budget))
}

#[wasm_bindgen(js_name = vertexRisk)]
pub fn vertex_risk(radii: &str, design: &str, parameter: f64) -> Result<String, JsValue> {
    to_js(vertex_risk_json(radii, design, parameter))
}

#[wasm_bindgen]
pub fn simulate(radii: &str, budget: f64, reps: u32, seed: u32) -> Result<String, JsValue> {
    to_js(simulate_json(radii, budget, reps as u64, seed as u64))
}
