//! Browser bindings for the interferometer simulator.
//!
//! Three operations back the demo page, each returning a JSON string so the
//! page needs no generated TypeScript: [`interference_curve`] simulates one
//! phase sweep of a photon-pair state, [`figure_curve`] runs a shipped
//! figure preset, and [`locked_run`] runs the three-segment flip test. The
//! JSON-building core functions are plain Rust so they compile and test
//! natively; the `wasm_bindgen` exports are thin wrappers.

use wasm_bindgen::prelude::*;

use swapmeter::counting::{SweepPlan, simulate_sweep, uniform_phases};
use swapmeter::estimate::{LockedSettings, fit_interference, locked_witness_run};
use swapmeter::experiment::config::{ExperimentConfig, ExperimentKind, parse_joint_state};
use swapmeter::experiment::runner::run_sections;
use swapmeter::network::{OpticalConfig, ideal_coincidence_rate, ideal_visibility};

/// Phase sweep of a photon-pair state: ideal rates, Poisson counts, and the
/// fitted visibility next to the exact `tr(rho S)`.
pub fn interference_curve_json(
    state_spec: &str,
    epsilon: f64,
    phases: u32,
    mean_counts: f64,
    seed: u32,
) -> Result<String, String> {
    let joint = parse_joint_state(state_spec)?;
    if phases < 4 {
        return Err(format!("need at least 4 phase points, got {phases}"));
    }
    if !(mean_counts.is_finite() && mean_counts > 0.0) {
        return Err(format!("mean counts must be positive, got {mean_counts}"));
    }
    let grid = uniform_phases(phases as usize);
    let rates: Result<Vec<f64>, String> = grid
        .iter()
        .map(|&phi| {
            let cfg = OpticalConfig::new(phi, epsilon).map_err(|e| e.to_string())?;
            Ok(ideal_coincidence_rate(&joint, &cfg))
        })
        .collect();
    let rates = rates?;
    let plan = SweepPlan::new(grid.clone(), mean_counts, seed as u64, 0.0, epsilon)
        .map_err(|e| e.to_string())?;
    let records = simulate_sweep(&joint, &plan);
    let counts: Vec<u64> = records.iter().map(|r| r.counts).collect();
    let fit = fit_interference(&records).map_err(|e| e.to_string())?;
    Ok(serde_json::json!({
        "phases": grid,
        "rates": rates,
        "counts": counts,
        "mean_counts": mean_counts,
        "oracle_visibility": ideal_visibility(&joint),
        "fitted_visibility_magnitude": fit.visibility_magnitude,
        "fitted_offset": fit.offset_a,
        "fitted_phase": fit.fitted_phase(),
    })
    .to_string())
}

/// Runs one shipped figure preset and returns its oracle/estimate curve.
pub fn figure_curve_json(preset: &str, seed: u32, mean_counts: f64) -> Result<String, String> {
    let kind = ExperimentKind::from_token(preset)
        .filter(|k| {
            matches!(
                k,
                ExperimentKind::Fig3a | ExperimentKind::Fig3b | ExperimentKind::Fig3c
                    | ExperimentKind::Fig3d
            )
        })
        .ok_or_else(|| format!("unknown figure preset '{preset}'"))?;
    if !(mean_counts.is_finite() && mean_counts > 0.0) {
        return Err(format!("mean counts must be positive, got {mean_counts}"));
    }
    let mut config = ExperimentConfig::preset(kind);
    config.seed = seed as u64;
    config.mean_counts = mean_counts;
    let output = run_sections(&[config]).map_err(|e| e.to_string())?;
    let curve = &output.artifacts[0].contents;
    let mut thetas = Vec::new();
    let mut oracles = Vec::new();
    let mut estimates = Vec::new();
    for line in curve.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        thetas.push(cols[0]);
        oracles.push(cols[1]);
        estimates.push(cols[2]);
    }
    let max_abs_error = output
        .manifest
        .lines()
        .find_map(|l| l.strip_prefix("max_abs_error = "))
        .expect("figure manifest block carries max_abs_error")
        .to_string();
    Ok(serde_json::json!({
        "preset": preset,
        "thetas": thetas,
        "oracles": oracles,
        "estimates": estimates,
        "max_abs_error": max_abs_error.parse::<f64>().unwrap_or(f64::NAN),
    })
    .to_string())
}

/// Three-segment locked flip test of a photon-pair state against the
/// built-in `|HH>` reference.
pub fn locked_run_json(
    state_spec: &str,
    threshold: f64,
    mean_counts: f64,
    drift_sigma: f64,
    seed: u32,
) -> Result<String, String> {
    let joint = parse_joint_state(state_spec)?;
    if !(mean_counts.is_finite() && mean_counts > 0.0) {
        return Err(format!("mean counts must be positive, got {mean_counts}"));
    }
    if !(drift_sigma.is_finite() && drift_sigma >= 0.0) {
        return Err(format!("drift sigma must be nonnegative, got {drift_sigma}"));
    }
    let settings = LockedSettings {
        lock_phase: 0.0,
        dots_per_segment: 50,
        mean_counts,
        seed: seed as u64,
        drift_sigma,
        epsilon: 1.0,
        threshold,
    };
    let (verdict, records) =
        locked_witness_run(&joint, &settings).map_err(|e| e.to_string())?;
    let segments: Vec<usize> = records.iter().map(|(s, _)| *s).collect();
    let counts: Vec<u64> = records.iter().map(|(_, r)| r.counts).collect();
    Ok(serde_json::json!({
        "segments": segments,
        "counts": counts,
        "verdict": verdict.verdict.name(),
        "statistic": verdict.statistic,
        "threshold": verdict.threshold,
        "oracle_visibility": ideal_visibility(&joint),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn interference_curve(
    state_spec: &str,
    epsilon: f64,
    phases: u32,
    mean_counts: f64,
    seed: u32,
) -> Result<String, JsError> {
    interference_curve_json(state_spec, epsilon, phases, mean_counts, seed)
        .map_err(|m| JsError::new(&m))
}

#[wasm_bindgen]
pub fn figure_curve(preset: &str, seed: u32, mean_counts: f64) -> Result<String, JsError> {
    figure_curve_json(preset, seed, mean_counts).map_err(|m| JsError::new(&m))
}

#[wasm_bindgen]
pub fn locked_run(
    state_spec: &str,
    threshold: f64,
    mean_counts: f64,
    drift_sigma: f64,
    seed: u32,
) -> Result<String, JsError> {
    locked_run_json(state_spec, threshold, mean_counts, drift_sigma, seed)
        .map_err(|m| JsError::new(&m))
}
