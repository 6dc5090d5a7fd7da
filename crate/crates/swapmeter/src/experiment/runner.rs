//! Executes validated experiment configs in memory.
//!
//! [`run_sections`] produces a [`RunOutput`]: a flat `key = value` manifest
//! echoing every effective parameter next to each estimate, oracle, and
//! verdict, plus named CSV artifacts (raw counts for sweeps and locked
//! runs, oracle/estimate curves for the figure presets). Nothing touches
//! the filesystem and nothing depends on wall-clock time, so identical
//! configs produce byte-identical output.

use std::fmt::Write as _;

use crate::counting::{derive_seed, locked_to_csv, sweep_to_csv};
use crate::estimate::{
    EstimateError, FunctionalRun, LockedSettings, locked_witness_run, overlap_run, purity_run,
    fidelity_run, hs_distance_run, witness_run,
};
use crate::experiment::config::{ExperimentConfig, ExperimentKind};
use crate::qmath::CMatrix;
use crate::states::{DensityOp, NonmaxBasis, PureState, hwp_jones, nonmax_entangled, Sign};

/// Header of every figure-preset curve CSV.
pub const CURVE_CSV_HEADER: &str = "theta_or_phase,oracle_value,estimate";

/// One output file, named relative to the caller's output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunArtifact {
    pub filename: String,
    pub contents: String,
}

/// Everything a run produces, in deterministic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub manifest: String,
    pub artifacts: Vec<RunArtifact>,
}

/// Stable one-line-per-preset listing of the shipped figure presets.
pub fn list_presets() -> String {
    let lines = [
        "fig3a  overlap sweep: state_a = |H>, state_b = hwp(theta)|H>; oracle cos^2(2 theta)",
        "fig3b  overlap sweep: state_a = hwp(theta)|H>, state_b = [[0.5,0.29],[0.29,0.5]]; \
         oracle 0.5 + 0.29 sin(4 theta)",
        "fig3c  purity sweep of hwp(theta)|H>; oracle 1 at every theta",
        "fig3d  witness sweep of cos(2 theta)|HV> +- sin(2 theta)|VH>; signed oracle \
         sin(4 theta)",
        "fig4a  locked flip test: singlet outer segments, |HH> reference middle; expected \
         verdict entangled",
        "fig4c  locked flip test: triplet outer segments, |HH> reference middle; expected \
         verdict inconclusive",
    ];
    let mut out = String::new();
    for line in lines {
        out.push_str(line);
        out.push('\n');
    }
    out
}

/// Runs every section and assembles the manifest and artifacts.
pub fn run_sections(configs: &[ExperimentConfig]) -> Result<RunOutput, EstimateError> {
    let mut manifest = String::new();
    let _ = writeln!(manifest, "swapmeter_version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(manifest, "sections = {}", configs.len());
    let mut artifacts = Vec::new();
    for config in configs {
        manifest.push('\n');
        let (block, mut files) = run_one(config)?;
        manifest.push_str(&block);
        artifacts.append(&mut files);
    }
    Ok(RunOutput { manifest, artifacts })
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            let c = c.to_ascii_lowercase();
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }
        })
        .collect()
}

fn common_block(config: &ExperimentConfig) -> String {
    let mut block = String::new();
    let _ = writeln!(block, "[{}]", config.name);
    let _ = writeln!(block, "experiment = {}", config.kind.token());
    let _ = writeln!(block, "seed = {}", config.seed);
    let _ = writeln!(block, "mean_counts = {}", config.mean_counts);
    let _ = writeln!(block, "epsilon = {}", config.epsilon);
    let _ = writeln!(block, "drift_sigma = {}", config.drift_sigma);
    block
}

fn run_one(config: &ExperimentConfig) -> Result<(String, Vec<RunArtifact>), EstimateError> {
    match config.kind {
        ExperimentKind::Overlap
        | ExperimentKind::Purity
        | ExperimentKind::Fidelity
        | ExperimentKind::HsDist
        | ExperimentKind::WitnessSweep => run_functional(config),
        ExperimentKind::Fig3a | ExperimentKind::Fig3b | ExperimentKind::Fig3c
        | ExperimentKind::Fig3d => run_figure(config),
        ExperimentKind::WitnessLocked | ExperimentKind::Fig4a | ExperimentKind::Fig4c => {
            run_locked(config)
        }
    }
}

fn run_functional(config: &ExperimentConfig) -> Result<(String, Vec<RunArtifact>), EstimateError> {
    let plan = config.sweep_plan(config.seed);
    let run: FunctionalRun = match config.kind {
        ExperimentKind::Overlap => {
            let a = config.state_a.as_ref().expect("validated overlap config");
            let b = config.state_b.as_ref().expect("validated overlap config");
            overlap_run(a, b, &plan)?
        }
        ExperimentKind::Purity => {
            let s = config.state_a.as_ref().expect("validated purity config");
            purity_run(s, &plan)?
        }
        ExperimentKind::Fidelity => {
            let target = config.target.as_ref().expect("validated fidelity config");
            let s = config.state_a.as_ref().expect("validated fidelity config");
            fidelity_run(target, s, &plan)?
        }
        ExperimentKind::HsDist => {
            let a = config.state_a.as_ref().expect("validated hsdist config");
            let b = config.state_b.as_ref().expect("validated hsdist config");
            hs_distance_run(a, b, &plan)?
        }
        ExperimentKind::WitnessSweep => {
            let joint = config.joint.as_ref().expect("validated witness config");
            witness_run(joint, &plan)?
        }
        _ => unreachable!("not a functional sweep"),
    };

    let prefix = sanitize(&config.name);
    let mut block = common_block(config);
    let _ = writeln!(block, "phases = {}", config.phases);
    block.push_str(&run.report.to_kv_block());
    let mut artifacts = Vec::new();
    for (label, records) in &run.runs {
        let filename = format!("{prefix}_{label}_counts.csv");
        let _ = writeln!(block, "counts_csv_{label} = {filename}");
        artifacts.push(RunArtifact { filename, contents: sweep_to_csv(records) });
    }
    Ok((block, artifacts))
}

fn fig3b_mixed_state() -> DensityOp {
    let matrix = CMatrix::from_real(2, &[0.5, 0.29, 0.29, 0.5]).expect("square literal");
    DensityOp::from_matrix(matrix).expect("valid density matrix")
}

fn hwp_rotated(theta: f64) -> DensityOp {
    PureState::h()
        .apply(&hwp_jones(theta))
        .expect("waveplate action preserves normalization")
        .to_density()
}

fn run_figure(config: &ExperimentConfig) -> Result<(String, Vec<RunArtifact>), EstimateError> {
    let thetas = config.theta_grid();
    let mut rows = Vec::with_capacity(thetas.len());
    let mut derived = Vec::with_capacity(thetas.len());
    let mut max_abs_error = 0.0f64;
    for (k, &theta) in thetas.iter().enumerate() {
        let seed = derive_seed(config.seed, k as u64);
        derived.push(seed);
        let plan = config.sweep_plan(seed);
        let report = match config.kind {
            ExperimentKind::Fig3a => {
                overlap_run(&PureState::h().to_density(), &hwp_rotated(theta), &plan)?.report
            }
            ExperimentKind::Fig3b => {
                overlap_run(&hwp_rotated(theta), &fig3b_mixed_state(), &plan)?.report
            }
            ExperimentKind::Fig3c => purity_run(&hwp_rotated(theta), &plan)?.report,
            ExperimentKind::Fig3d => {
                let joint = nonmax_entangled(theta, config.sign, NonmaxBasis::HvVh).to_density();
                witness_run(&joint, &plan)?.report
            }
            _ => unreachable!("not a figure sweep"),
        };
        max_abs_error = max_abs_error.max(report.abs_error);
        rows.push((theta, report.oracle, report.estimate));
    }

    let mut curve = String::from(CURVE_CSV_HEADER);
    curve.push('\n');
    for (theta, oracle, estimate) in &rows {
        let _ = writeln!(curve, "{theta},{oracle},{estimate}");
    }

    let prefix = sanitize(&config.name);
    let filename = format!("{prefix}_curve.csv");
    let mut block = common_block(config);
    let _ = writeln!(block, "phases = {}", config.phases);
    let _ = writeln!(block, "thetas = {}", config.thetas);
    let _ = writeln!(block, "theta_start = {}", config.theta_span.0);
    let _ = writeln!(block, "theta_end = {}", config.theta_span.1);
    if config.kind == ExperimentKind::Fig3d {
        let sign = match config.sign {
            Sign::Plus => "+",
            Sign::Minus => "-",
        };
        let _ = writeln!(block, "sign = {sign}");
    }
    let _ = writeln!(block, "points = {}", rows.len());
    let _ = writeln!(block, "max_abs_error = {max_abs_error}");
    let _ = writeln!(block, "curve_csv = {filename}");
    for (k, seed) in derived.iter().enumerate() {
        let _ = writeln!(block, "derived_seed_{k:02} = {seed}");
    }
    Ok((block, vec![RunArtifact { filename, contents: curve }]))
}

fn run_locked(config: &ExperimentConfig) -> Result<(String, Vec<RunArtifact>), EstimateError> {
    let state = match config.kind {
        ExperimentKind::Fig4a => PureState::singlet().to_density(),
        ExperimentKind::Fig4c => PureState::triplet().to_density(),
        ExperimentKind::WitnessLocked => {
            config.joint.as_ref().expect("validated locked config").clone()
        }
        _ => unreachable!("not a locked run"),
    };
    let settings = LockedSettings {
        lock_phase: config.lock_phase,
        dots_per_segment: config.dots_per_segment,
        mean_counts: config.mean_counts,
        seed: config.seed,
        drift_sigma: config.drift_sigma,
        epsilon: config.epsilon,
        threshold: config.threshold,
    };
    let (verdict, records) = locked_witness_run(&state, &settings)?;

    let prefix = sanitize(&config.name);
    let filename = format!("{prefix}_locked_counts.csv");
    let mut block = common_block(config);
    let _ = writeln!(block, "lock_phase = {}", config.lock_phase);
    let _ = writeln!(block, "dots_per_segment = {}", config.dots_per_segment);
    block.push_str(&verdict.to_kv_block());
    let _ = writeln!(block, "counts_csv = {filename}");
    Ok((block, vec![RunArtifact { filename, contents: locked_to_csv(&records) }]))
}
