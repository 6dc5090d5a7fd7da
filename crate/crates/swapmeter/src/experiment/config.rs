//! Experiment configuration: a flat `key = value` text format with one
//! `[section]` per experiment, plus the state-spec mini-language.
//!
//! A config file looks like
//!
//! ```text
//! [fig3a]
//! seed = 7
//!
//! [check]
//! experiment = overlap
//! state_a = h
//! state_b = hwp:pi/8
//! mean_counts = 10000
//! ```
//!
//! A section whose name is an experiment token needs no `experiment` key; a
//! headerless file is a single anonymous section. Every field is validated
//! on parse, and diagnostics name the offending section and field.
//!
//! State specs:
//!
//! - single photon: `h`, `v`, `mixed`, `hwp:<angle>` (waveplate-rotated
//!   `|H>`), `dephased:<angle>:<kappa>` (the same state sent through a
//!   dephaser), a ket literal `[a, b]`, or a matrix literal `[[..],[..]]`;
//! - photon pair: `hh`, `hv`, `vh`, `vv`, `phi+`, `phi-`, `singlet`,
//!   `triplet`, `werner:<p>`, `nonmax:<angle>:<+|->:<hv_vh|hh_vv>`, a
//!   4-element ket literal, or a 4x4 matrix literal.
//!
//! Angles accept plain floats and the forms `pi`, `pi/<x>`, `<x>*pi`;
//! matrix entries accept complex literals like `0.5`, `-0.29i`, `0.1+0.2i`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::counting::{SweepPlan, uniform_phases};
use crate::qmath::{C64, CMatrix};
use crate::states::{
    DensityOp, DephaserSetting, NonmaxBasis, PureState, Sign, apply_quartz, hwp_jones,
    make_werner, nonmax_entangled,
};

pub const DEFAULT_PHASES: usize = 36;
pub const DEFAULT_THETAS: usize = 19;
pub const DEFAULT_MEAN_COUNTS: f64 = 1000.0;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_EPSILON: f64 = 1.0;
pub const DEFAULT_DRIFT_SIGMA: f64 = 0.0;
pub const DEFAULT_THRESHOLD: f64 = 5.0;
pub const DEFAULT_LOCK_PHASE: f64 = 0.0;
pub const DEFAULT_DOTS_PER_SEGMENT: usize = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("section '{section}', field '{field}': {message}")]
    Field { section: String, field: String, message: String },
}

/// The experiments the runner knows how to execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Overlap,
    Purity,
    Fidelity,
    HsDist,
    WitnessSweep,
    WitnessLocked,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig3d,
    Fig4a,
    Fig4c,
}

impl ExperimentKind {
    pub fn token(&self) -> &'static str {
        match self {
            ExperimentKind::Overlap => "overlap",
            ExperimentKind::Purity => "purity",
            ExperimentKind::Fidelity => "fidelity",
            ExperimentKind::HsDist => "hsdist",
            ExperimentKind::WitnessSweep => "witness_sweep",
            ExperimentKind::WitnessLocked => "witness_locked",
            ExperimentKind::Fig3a => "fig3a",
            ExperimentKind::Fig3b => "fig3b",
            ExperimentKind::Fig3c => "fig3c",
            ExperimentKind::Fig3d => "fig3d",
            ExperimentKind::Fig4a => "fig4a",
            ExperimentKind::Fig4c => "fig4c",
        }
    }

    pub fn from_token(token: &str) -> Option<ExperimentKind> {
        Some(match token {
            "overlap" => ExperimentKind::Overlap,
            "purity" => ExperimentKind::Purity,
            "fidelity" => ExperimentKind::Fidelity,
            "hsdist" => ExperimentKind::HsDist,
            "witness_sweep" => ExperimentKind::WitnessSweep,
            "witness_locked" => ExperimentKind::WitnessLocked,
            "fig3a" => ExperimentKind::Fig3a,
            "fig3b" => ExperimentKind::Fig3b,
            "fig3c" => ExperimentKind::Fig3c,
            "fig3d" => ExperimentKind::Fig3d,
            "fig4a" => ExperimentKind::Fig4a,
            "fig4c" => ExperimentKind::Fig4c,
            _ => return None,
        })
    }

    fn is_locked(&self) -> bool {
        matches!(
            self,
            ExperimentKind::WitnessLocked | ExperimentKind::Fig4a | ExperimentKind::Fig4c
        )
    }
}

/// One fully validated experiment; states are resolved to operators.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    pub state_a: Option<DensityOp>,
    pub state_b: Option<DensityOp>,
    pub target: Option<PureState>,
    pub joint: Option<DensityOp>,
    pub sign: Sign,
    pub phases: usize,
    /// `None` means the canonical full turn `2 pi k / n`.
    pub phase_span: Option<(f64, f64)>,
    pub thetas: usize,
    pub theta_span: (f64, f64),
    pub mean_counts: f64,
    pub seed: u64,
    pub epsilon: f64,
    pub drift_sigma: f64,
    pub threshold: f64,
    pub lock_phase: f64,
    pub dots_per_segment: usize,
}

impl ExperimentConfig {
    /// The named experiment with every knob at its shipped default.
    pub fn preset(kind: ExperimentKind) -> ExperimentConfig {
        ExperimentConfig {
            name: kind.token().to_string(),
            kind,
            state_a: None,
            state_b: None,
            target: None,
            joint: None,
            sign: Sign::Plus,
            phases: DEFAULT_PHASES,
            phase_span: None,
            thetas: DEFAULT_THETAS,
            theta_span: (0.0, PI / 4.0),
            mean_counts: DEFAULT_MEAN_COUNTS,
            seed: DEFAULT_SEED,
            epsilon: DEFAULT_EPSILON,
            drift_sigma: DEFAULT_DRIFT_SIGMA,
            threshold: DEFAULT_THRESHOLD,
            lock_phase: DEFAULT_LOCK_PHASE,
            dots_per_segment: DEFAULT_DOTS_PER_SEGMENT,
        }
    }

    /// Phase grid for sweep experiments.
    pub fn phase_grid(&self) -> Vec<f64> {
        match self.phase_span {
            None => uniform_phases(self.phases),
            Some((a, b)) => linspace(a, b, self.phases),
        }
    }

    /// Theta grid for figure presets (endpoints included).
    pub fn theta_grid(&self) -> Vec<f64> {
        linspace(self.theta_span.0, self.theta_span.1, self.thetas)
    }

    /// Sweep plan at this config's counting parameters and the given seed.
    pub fn sweep_plan(&self, seed: u64) -> SweepPlan {
        SweepPlan::new(self.phase_grid(), self.mean_counts, seed, self.drift_sigma, self.epsilon)
            .expect("validated config produces a valid plan")
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "grids have at least two points");
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// Parses a full config file into validated experiments, in file order.
pub fn parse_config(text: &str) -> Result<Vec<ExperimentConfig>, ConfigError> {
    let sections = split_sections(text)?;
    let mut configs = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for section in &sections {
        let config = build_config(section)?;
        if names.contains(&config.name) {
            return Err(ConfigError::Field {
                section: config.name.clone(),
                field: "name".to_string(),
                message: "duplicate section name".to_string(),
            });
        }
        names.push(config.name.clone());
        configs.push(config);
    }
    Ok(configs)
}

struct RawSection {
    name: Option<String>,
    header_line: usize,
    entries: Vec<(usize, String, String)>,
}

fn split_sections(text: &str) -> Result<Vec<RawSection>, ConfigError> {
    let mut sections: Vec<RawSection> = Vec::new();
    for (index, raw_line) in text.lines().enumerate() {
        let line = index + 1;
        let trimmed = raw_line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line,
                message: "unterminated section header".to_string(),
            })?;
            let name = name.trim();
            if name.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    message: "empty section name".to_string(),
                });
            }
            sections.push(RawSection {
                name: Some(name.to_string()),
                header_line: line,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            message: "expected 'key = value'".to_string(),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(ConfigError::Syntax { line, message: "empty key".to_string() });
        }
        if sections.is_empty() {
            sections.push(RawSection { name: None, header_line: line, entries: Vec::new() });
        }
        let section = sections.last_mut().expect("just ensured nonempty");
        if section.entries.iter().any(|(_, k, _)| k == &key) {
            return Err(ConfigError::Syntax {
                line,
                message: format!("duplicate key '{key}' in one section"),
            });
        }
        section.entries.push((line, key, value));
    }
    if sections.is_empty() {
        return Err(ConfigError::Syntax {
            line: 1,
            message: "config contains no experiments".to_string(),
        });
    }
    Ok(sections)
}

fn build_config(section: &RawSection) -> Result<ExperimentConfig, ConfigError> {
    let provisional_name = section
        .name
        .clone()
        .unwrap_or_default();
    let field_err = |field: &str, message: String| ConfigError::Field {
        section: if provisional_name.is_empty() { "(anonymous)".to_string() } else { provisional_name.clone() },
        field: field.to_string(),
        message,
    };

    let get = |key: &str| -> Option<&str> {
        section
            .entries
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(_, _, v)| v.as_str())
    };

    let kind = match get("experiment") {
        Some(token) => ExperimentKind::from_token(token)
            .ok_or_else(|| field_err("experiment", format!("unknown experiment '{token}'")))?,
        None => {
            let token = section.name.as_deref().ok_or_else(|| ConfigError::Syntax {
                line: section.header_line,
                message: "anonymous section needs an 'experiment' key".to_string(),
            })?;
            ExperimentKind::from_token(token).ok_or_else(|| {
                field_err(
                    "experiment",
                    format!("section name '{token}' is not an experiment and no 'experiment' key given"),
                )
            })?
        }
    };
    let name = section.name.clone().unwrap_or_else(|| kind.token().to_string());
    let field_err = |field: &str, message: String| ConfigError::Field {
        section: name.clone(),
        field: field.to_string(),
        message,
    };

    let mut allowed: Vec<&str> =
        vec!["experiment", "seed", "mean_counts", "epsilon", "drift_sigma"];
    if !kind.is_locked() {
        allowed.push("phases");
    }
    match kind {
        ExperimentKind::Overlap | ExperimentKind::HsDist => {
            allowed.extend(["state_a", "state_b"]);
        }
        ExperimentKind::Purity | ExperimentKind::WitnessSweep => allowed.push("state"),
        ExperimentKind::Fidelity => allowed.extend(["target", "state"]),
        ExperimentKind::WitnessLocked => {
            allowed.extend(["state", "threshold", "lock_phase", "dots_per_segment"]);
        }
        ExperimentKind::Fig3a | ExperimentKind::Fig3b | ExperimentKind::Fig3c => {
            allowed.push("thetas");
        }
        ExperimentKind::Fig3d => allowed.extend(["thetas", "sign"]),
        ExperimentKind::Fig4a | ExperimentKind::Fig4c => {
            allowed.extend(["threshold", "lock_phase", "dots_per_segment"]);
        }
    }
    for (_, key, _) in &section.entries {
        if !allowed.contains(&key.as_str()) {
            return Err(field_err(key, format!("not a field of experiment '{}'", kind.token())));
        }
    }

    let mut config = ExperimentConfig::preset(kind);
    config.name = name.clone();

    if let Some(v) = get("seed") {
        config.seed = v
            .parse::<u64>()
            .map_err(|_| field_err("seed", format!("expected an unsigned integer, got '{v}'")))?;
    }
    if let Some(v) = get("mean_counts") {
        let x: f64 = v
            .parse()
            .map_err(|_| field_err("mean_counts", format!("expected a number, got '{v}'")))?;
        if !(x.is_finite() && x > 0.0) {
            return Err(field_err("mean_counts", format!("must be positive and finite, got {x}")));
        }
        config.mean_counts = x;
    }
    if let Some(v) = get("epsilon") {
        let x: f64 = v
            .parse()
            .map_err(|_| field_err("epsilon", format!("expected a number, got '{v}'")))?;
        if !(0.0..=1.0).contains(&x) {
            return Err(field_err("epsilon", format!("must lie in [0, 1], got {x}")));
        }
        config.epsilon = x;
    }
    if let Some(v) = get("drift_sigma") {
        let x: f64 = v
            .parse()
            .map_err(|_| field_err("drift_sigma", format!("expected a number, got '{v}'")))?;
        if !(x.is_finite() && x >= 0.0) {
            return Err(field_err("drift_sigma", format!("must be nonnegative, got {x}")));
        }
        config.drift_sigma = x;
    }
    if let Some(v) = get("phases") {
        let (count, span) = parse_grid(v).map_err(|m| field_err("phases", m))?;
        if count < 4 {
            return Err(field_err(
                "phases",
                format!("phase grid needs at least 4 points for a fit, got {count}"),
            ));
        }
        config.phases = count;
        config.phase_span = span;
    }
    if let Some(v) = get("thetas") {
        let (count, span) = parse_grid(v).map_err(|m| field_err("thetas", m))?;
        if count < 2 {
            return Err(field_err("thetas", format!("theta grid needs at least 2 points, got {count}")));
        }
        config.thetas = count;
        if let Some(span) = span {
            config.theta_span = span;
        }
    }
    if let Some(v) = get("threshold") {
        let x: f64 = v
            .parse()
            .map_err(|_| field_err("threshold", format!("expected a number, got '{v}'")))?;
        if !(x.is_finite() && x > 0.0) {
            return Err(field_err("threshold", format!("must be positive, got {x}")));
        }
        config.threshold = x;
    }
    if let Some(v) = get("lock_phase") {
        config.lock_phase = parse_angle(v).map_err(|m| field_err("lock_phase", m))?;
    }
    if let Some(v) = get("dots_per_segment") {
        let n: usize = v
            .parse()
            .map_err(|_| field_err("dots_per_segment", format!("expected a count, got '{v}'")))?;
        if n == 0 {
            return Err(field_err("dots_per_segment", "must be at least 1".to_string()));
        }
        config.dots_per_segment = n;
    }
    if let Some(v) = get("sign") {
        config.sign = match v {
            "+" => Sign::Plus,
            "-" => Sign::Minus,
            _ => return Err(field_err("sign", format!("expected '+' or '-', got '{v}'"))),
        };
    }

    match kind {
        ExperimentKind::Overlap | ExperimentKind::HsDist => {
            let a = get("state_a").ok_or_else(|| field_err("state_a", "required".to_string()))?;
            let b = get("state_b").ok_or_else(|| field_err("state_b", "required".to_string()))?;
            config.state_a = Some(parse_single_state(a).map_err(|m| field_err("state_a", m))?);
            config.state_b = Some(parse_single_state(b).map_err(|m| field_err("state_b", m))?);
        }
        ExperimentKind::Purity => {
            let s = get("state").ok_or_else(|| field_err("state", "required".to_string()))?;
            config.state_a = Some(parse_single_state(s).map_err(|m| field_err("state", m))?);
        }
        ExperimentKind::Fidelity => {
            let t = get("target").ok_or_else(|| field_err("target", "required".to_string()))?;
            let s = get("state").ok_or_else(|| field_err("state", "required".to_string()))?;
            config.target = Some(parse_pure_target(t).map_err(|m| field_err("target", m))?);
            config.state_a = Some(parse_single_state(s).map_err(|m| field_err("state", m))?);
        }
        ExperimentKind::WitnessSweep | ExperimentKind::WitnessLocked => {
            let s = get("state").ok_or_else(|| field_err("state", "required".to_string()))?;
            config.joint = Some(parse_joint_state(s).map_err(|m| field_err("state", m))?);
        }
        _ => {}
    }

    Ok(config)
}

/// Grid spec: `<count>` or `<count> in <a>..<b>`.
fn parse_grid(s: &str) -> Result<(usize, Option<(f64, f64)>), String> {
    let (count_part, span_part) = match s.split_once(" in ") {
        Some((c, r)) => (c.trim(), Some(r.trim())),
        None => (s.trim(), None),
    };
    let count: usize = count_part
        .parse()
        .map_err(|_| format!("expected a point count, got '{count_part}'"))?;
    let span = match span_part {
        None => None,
        Some(r) => {
            let (a, b) = r
                .split_once("..")
                .ok_or_else(|| format!("expected '<a>..<b>' range, got '{r}'"))?;
            let a = parse_angle(a)?;
            let b = parse_angle(b)?;
            if !a.is_finite() || !b.is_finite() || b <= a {
                return Err(format!("range must be finite and increasing, got {a}..{b}"));
            }
            Some((a, b))
        }
    };
    Ok((count, span))
}

/// Angles: a float literal, `pi`, `pi/<x>`, or `<x>*pi`, with optional sign.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest.trim()),
        None => (1.0, t),
    };
    if let Ok(x) = body.parse::<f64>() {
        return Ok(sign * x);
    }
    if body == "pi" {
        return Ok(sign * PI);
    }
    if let Some(den) = body.strip_prefix("pi/") {
        let d: f64 = den
            .trim()
            .parse()
            .map_err(|_| format!("bad angle '{s}'"))?;
        if d == 0.0 {
            return Err(format!("bad angle '{s}': division by zero"));
        }
        return Ok(sign * PI / d);
    }
    if let Some(mul) = body.strip_suffix("*pi") {
        let m: f64 = mul
            .trim()
            .parse()
            .map_err(|_| format!("bad angle '{s}'"))?;
        return Ok(sign * m * PI);
    }
    Err(format!("bad angle '{s}' (expected a number, 'pi', 'pi/<x>', or '<x>*pi')"))
}

/// Complex literals: `a`, `bi`, `i`, `a+bi`, `a-bi`.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty complex literal".to_string());
    }
    let parse_imag_coeff = |c: &str| -> Result<f64, String> {
        match c {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => c.parse().map_err(|_| format!("bad complex literal '{s}'")),
        }
    };
    if let Some(body) = t.strip_suffix('i') {
        // Find a +/- separating real and imaginary parts: not the leading
        // sign and not an exponent sign.
        let chars: Vec<char> = body.chars().collect();
        let mut split = None;
        for k in (1..chars.len()).rev() {
            if (chars[k] == '+' || chars[k] == '-')
                && chars[k - 1] != 'e'
                && chars[k - 1] != 'E'
            {
                split = Some(k);
                break;
            }
        }
        match split {
            Some(k) => {
                let re: f64 = body[..k]
                    .parse()
                    .map_err(|_| format!("bad complex literal '{s}'"))?;
                let im = parse_imag_coeff(&body[k..])?;
                Ok(C64::new(re, im))
            }
            None => Ok(C64::new(0.0, parse_imag_coeff(body)?)),
        }
    } else {
        let re: f64 = t.parse().map_err(|_| format!("bad complex literal '{s}'"))?;
        Ok(C64::new(re, 0.0))
    }
}

/// Splits `a, b, c` at bracket depth zero.
fn split_top_level(s: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    for c in s.chars() {
        match c {
            '[' => {
                depth += 1;
                current.push(c);
            }
            ']' => {
                depth = depth.saturating_sub(1);
                current.push(c);
            }
            ',' if depth == 0 => {
                parts.push(current.trim().to_string());
                current = String::new();
            }
            _ => current.push(c),
        }
    }
    parts.push(current.trim().to_string());
    parts
}

enum BracketLiteral {
    Ket(Vec<C64>),
    Matrix(Vec<Vec<C64>>),
}

fn parse_bracket(s: &str) -> Result<BracketLiteral, String> {
    let t = s.trim();
    let inner = t
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| format!("bad bracket literal '{s}'"))?;
    let parts = split_top_level(inner);
    if parts.iter().any(|p| p.starts_with('[')) {
        let mut rows = Vec::new();
        for part in &parts {
            let row_inner = part
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| format!("bad matrix row '{part}'"))?;
            let row: Result<Vec<C64>, String> =
                split_top_level(row_inner).iter().map(|e| parse_complex(e)).collect();
            rows.push(row?);
        }
        Ok(BracketLiteral::Matrix(rows))
    } else {
        let entries: Result<Vec<C64>, String> = parts.iter().map(|e| parse_complex(e)).collect();
        Ok(BracketLiteral::Ket(entries?))
    }
}

fn density_from_literal(s: &str, dim: usize) -> Result<DensityOp, String> {
    match parse_bracket(s)? {
        BracketLiteral::Ket(amplitudes) => {
            if amplitudes.len() != dim {
                return Err(format!(
                    "ket literal has {} amplitudes, expected {dim}",
                    amplitudes.len()
                ));
            }
            let psi = PureState::new(amplitudes).map_err(|e| e.to_string())?;
            Ok(psi.to_density())
        }
        BracketLiteral::Matrix(rows) => {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(format!("matrix literal must be {dim}x{dim}"));
            }
            let entries: Vec<C64> = rows.into_iter().flatten().collect();
            let matrix = CMatrix::new(dim, dim, entries).map_err(|e| e.to_string())?;
            DensityOp::from_matrix(matrix).map_err(|e| e.to_string())
        }
    }
}

fn hwp_rotated(theta: f64) -> PureState {
    PureState::h()
        .apply(&hwp_jones(theta))
        .expect("waveplate action preserves normalization")
}

/// Single-photon state spec.
pub fn parse_single_state(s: &str) -> Result<DensityOp, String> {
    let t = s.trim();
    if t.starts_with('[') {
        return density_from_literal(t, 2);
    }
    let lower = t.to_ascii_lowercase();
    if lower == "h" {
        return Ok(PureState::h().to_density());
    }
    if lower == "v" {
        return Ok(PureState::v().to_density());
    }
    if lower == "mixed" {
        return Ok(DensityOp::maximally_mixed(2).expect("dimension 2 is valid"));
    }
    if let Some(rest) = lower.strip_prefix("hwp:") {
        let theta = parse_angle(rest)?;
        return Ok(hwp_rotated(theta).to_density());
    }
    if let Some(rest) = lower.strip_prefix("dephased:") {
        let (angle, kappa) = rest
            .split_once(':')
            .ok_or_else(|| format!("dephased spec needs '<angle>:<kappa>', got '{s}'"))?;
        let theta = parse_angle(angle)?;
        let kappa: f64 = kappa
            .trim()
            .parse()
            .map_err(|_| format!("bad kappa '{kappa}'"))?;
        let setting = DephaserSetting::new(kappa).map_err(|e| e.to_string())?;
        return Ok(apply_quartz(&hwp_rotated(theta).to_density(), &setting));
    }
    Err(format!(
        "unknown single-photon state '{s}' (expected h, v, mixed, hwp:<angle>, \
         dephased:<angle>:<kappa>, or a bracket literal)"
    ))
}

/// Pure single-photon target spec (for fidelity).
pub fn parse_pure_target(s: &str) -> Result<PureState, String> {
    let t = s.trim();
    if t.starts_with('[') {
        return match parse_bracket(t)? {
            BracketLiteral::Ket(amplitudes) => {
                if amplitudes.len() != 2 {
                    return Err(format!(
                        "target ket has {} amplitudes, expected 2",
                        amplitudes.len()
                    ));
                }
                PureState::new(amplitudes).map_err(|e| e.to_string())
            }
            BracketLiteral::Matrix(_) => {
                Err("fidelity target must be a pure state, not a matrix".to_string())
            }
        };
    }
    let lower = t.to_ascii_lowercase();
    if lower == "h" {
        return Ok(PureState::h());
    }
    if lower == "v" {
        return Ok(PureState::v());
    }
    if let Some(rest) = lower.strip_prefix("hwp:") {
        return Ok(hwp_rotated(parse_angle(rest)?));
    }
    Err(format!("unknown pure target '{s}' (expected h, v, hwp:<angle>, or a ket literal)"))
}

/// Photon-pair state spec.
pub fn parse_joint_state(s: &str) -> Result<DensityOp, String> {
    let t = s.trim();
    if t.starts_with('[') {
        return density_from_literal(t, 4);
    }
    let lower = t.to_ascii_lowercase();
    match lower.as_str() {
        "hh" => return Ok(PureState::hh().to_density()),
        "hv" => return Ok(PureState::hv().to_density()),
        "vh" => return Ok(PureState::vh().to_density()),
        "vv" => return Ok(PureState::vv().to_density()),
        "phi+" => return Ok(PureState::phi_plus().to_density()),
        "phi-" => return Ok(PureState::phi_minus().to_density()),
        "singlet" => return Ok(PureState::singlet().to_density()),
        "triplet" => return Ok(PureState::triplet().to_density()),
        _ => {}
    }
    if let Some(rest) = lower.strip_prefix("werner:") {
        let p: f64 = rest
            .trim()
            .parse()
            .map_err(|_| format!("bad werner parameter '{rest}'"))?;
        return make_werner(p).map_err(|e| e.to_string());
    }
    if let Some(rest) = lower.strip_prefix("nonmax:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("nonmax spec needs '<angle>:<+|->:<hv_vh|hh_vv>', got '{s}'"));
        }
        let theta = parse_angle(parts[0])?;
        let sign = match parts[1] {
            "+" => Sign::Plus,
            "-" => Sign::Minus,
            other => return Err(format!("bad sign '{other}' (expected '+' or '-')")),
        };
        let basis = match parts[2] {
            "hv_vh" => NonmaxBasis::HvVh,
            "hh_vv" => NonmaxBasis::HhVv,
            other => return Err(format!("bad basis '{other}' (expected 'hv_vh' or 'hh_vv')")),
        };
        return Ok(nonmax_entangled(theta, sign, basis).to_density());
    }
    Err(format!(
        "unknown photon-pair state '{s}' (expected hh, hv, vh, vv, phi+, phi-, singlet, \
         triplet, werner:<p>, nonmax:<angle>:<+|->:<basis>, or a bracket literal)"
    ))
}
