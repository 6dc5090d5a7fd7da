//! Monte Carlo photon counting on top of the analytic coincidence rate.
//!
//! The noise model is deliberately minimal: each dot draws
//! `counts ~ Poisson(N0 * r(phi_true))`, where `N0` is the expected count
//! at the curve's mean level `r = 1` and `phi_true` is the nominal phase
//! plus an optional Gaussian-random-walk drift. There are no dark counts,
//! no accidentals, and no dead time — shot noise alone is what makes
//! visibility estimation statistically nontrivial.
//!
//! Reproducibility contract: all randomness comes from a ChaCha8 generator
//! seeded by the plan. Dot `i` draws its counts from substream `i + 1` of
//! the seed and the drift walk is drawn up front from substream 0, so
//! results are byte-identical regardless of evaluation order (phase points
//! of a sweep are independent and may be evaluated concurrently). Composed
//! protocols derive sub-run seeds with [`derive_seed`], a SplitMix64-style
//! mix of a master seed and a salt.
//!
//! Sweep records serialize to CSV with the fixed header
//! `segment,phase_nominal_rad,counts` (segment 0 for plain sweeps, 0..=2
//! for the three-segment locked protocol) and LF line endings.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use thiserror::Error;

use crate::network::{OpticalConfig, ideal_coincidence_rate};
use crate::states::DensityOp;

/// CSV header shared by sweep and locked-run records.
pub const CSV_HEADER: &str = "segment,phase_nominal_rad,counts";

const DRIFT_STREAM: u64 = 0;
const FIRST_POINT_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CountingError {
    #[error("sweep plan has no phase points")]
    EmptyPhases,
    #[error("phase point {index} is not finite")]
    NonFinitePhase { index: usize },
    #[error("mean_counts must be positive and finite, got {value}")]
    BadMeanCounts { value: f64 },
    #[error("drift_sigma must be nonnegative and finite, got {value}")]
    BadDriftSigma { value: f64 },
    #[error("mode-overlap factor epsilon = {value} outside [0, 1]")]
    EpsilonRange { value: f64 },
    #[error("locked-run segment {index} has dimension {dim}, expected a two-photon state")]
    BadSegmentState { index: usize, dim: usize },
    #[error("dots_per_segment must be at least 1")]
    ZeroDots,
}

/// One counted dot: the nominal (set-point) phase and the Poisson draw.
///
/// Drift never alters `phase_nominal`; it shifts only the hidden true phase
/// that feeds the rate, exactly as a lab notebook records the commanded
/// piezo voltage rather than the unknowable instantaneous phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountRecord {
    pub phase_nominal: f64,
    pub counts: u64,
}

/// A phase sweep: nominal phases, count normalization, and noise settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    phases: Vec<f64>,
    mean_counts: f64,
    seed: u64,
    drift_sigma: f64,
    epsilon: f64,
}

impl SweepPlan {
    /// `mean_counts` is the expected counts per dot at rate `r = 1`;
    /// `drift_sigma` is the random-walk step (radians per dot).
    pub fn new(
        phases: Vec<f64>,
        mean_counts: f64,
        seed: u64,
        drift_sigma: f64,
        epsilon: f64,
    ) -> Result<Self, CountingError> {
        if phases.is_empty() {
            return Err(CountingError::EmptyPhases);
        }
        if let Some(index) = phases.iter().position(|p| !p.is_finite()) {
            return Err(CountingError::NonFinitePhase { index });
        }
        if !(mean_counts.is_finite() && mean_counts > 0.0) {
            return Err(CountingError::BadMeanCounts { value: mean_counts });
        }
        if !(drift_sigma.is_finite() && drift_sigma >= 0.0) {
            return Err(CountingError::BadDriftSigma { value: drift_sigma });
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(CountingError::EpsilonRange { value: epsilon });
        }
        Ok(Self { phases, mean_counts, seed, drift_sigma, epsilon })
    }

    /// The same plan with a different seed; how composed estimators hand
    /// derived seeds to their sub-runs.
    pub fn with_seed(&self, seed: u64) -> SweepPlan {
        SweepPlan { seed, ..self.clone() }
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn mean_counts(&self) -> f64 {
        self.mean_counts
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn drift_sigma(&self) -> f64 {
        self.drift_sigma
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// The three-segment phase-locked protocol: hold the phase at a lock point,
/// record a block of dots per input state, switching states between blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct LockedRunPlan {
    lock_phase: f64,
    segment_states: [DensityOp; 3],
    dots_per_segment: usize,
    mean_counts: f64,
    seed: u64,
    drift_sigma: f64,
    epsilon: f64,
}

impl LockedRunPlan {
    pub fn new(
        lock_phase: f64,
        segment_states: [DensityOp; 3],
        dots_per_segment: usize,
        mean_counts: f64,
        seed: u64,
        drift_sigma: f64,
        epsilon: f64,
    ) -> Result<Self, CountingError> {
        if !lock_phase.is_finite() {
            return Err(CountingError::NonFinitePhase { index: 0 });
        }
        for (index, state) in segment_states.iter().enumerate() {
            if state.dim() != 4 {
                return Err(CountingError::BadSegmentState { index, dim: state.dim() });
            }
        }
        if dots_per_segment == 0 {
            return Err(CountingError::ZeroDots);
        }
        if !(mean_counts.is_finite() && mean_counts > 0.0) {
            return Err(CountingError::BadMeanCounts { value: mean_counts });
        }
        if !(drift_sigma.is_finite() && drift_sigma >= 0.0) {
            return Err(CountingError::BadDriftSigma { value: drift_sigma });
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(CountingError::EpsilonRange { value: epsilon });
        }
        Ok(Self {
            lock_phase,
            segment_states,
            dots_per_segment,
            mean_counts,
            seed,
            drift_sigma,
            epsilon,
        })
    }

    pub fn lock_phase(&self) -> f64 {
        self.lock_phase
    }

    pub fn segment_states(&self) -> &[DensityOp; 3] {
        &self.segment_states
    }

    pub fn dots_per_segment(&self) -> usize {
        self.dots_per_segment
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mean_counts(&self) -> f64 {
        self.mean_counts
    }
}

/// Uniform nominal phase grid `2 pi k / n`, `k = 0..n`.
pub fn uniform_phases(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 * 2.0 * std::f64::consts::PI / n as f64).collect()
}

/// Derives a sub-run seed from a master seed and a salt (SplitMix64 mix).
pub fn derive_seed(master: u64, salt: u64) -> u64 {
    let mut z = master ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn point_stream(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(FIRST_POINT_STREAM + index as u64);
    rng
}

/// Accumulated drift at each dot: one Gaussian step is taken before every
/// dot, so dot `i` sees the partial sum through step `i`.
fn drift_walk(seed: u64, sigma: f64, n: usize) -> Vec<f64> {
    if sigma == 0.0 {
        return vec![0.0; n];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(DRIFT_STREAM);
    let step = Normal::new(0.0, sigma).expect("validated sigma");
    let mut acc = 0.0;
    (0..n)
        .map(|_| {
            acc += step.sample(&mut rng);
            acc
        })
        .collect()
}

fn draw_counts(rng: &mut ChaCha8Rng, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    let poisson = Poisson::new(lambda).expect("positive finite rate");
    poisson.sample(rng) as u64
}

/// Simulates one dot per nominal phase of the plan.
pub fn simulate_sweep(rho_ab: &DensityOp, plan: &SweepPlan) -> Vec<CountRecord> {
    assert_eq!(rho_ab.dim(), 4, "sweeps are defined for two-photon states");
    let drifts = drift_walk(plan.seed, plan.drift_sigma, plan.phases.len());
    plan.phases
        .iter()
        .enumerate()
        .map(|(i, &phase)| {
            let cfg = OpticalConfig::new(phase + drifts[i], plan.epsilon)
                .expect("validated plan parameters");
            let lambda = plan.mean_counts * ideal_coincidence_rate(rho_ab, &cfg);
            let counts = draw_counts(&mut point_stream(plan.seed, i), lambda);
            CountRecord { phase_nominal: phase, counts }
        })
        .collect()
}

/// Runs the three-segment locked protocol; drift accumulates across the
/// whole run, dot to dot and through segment changes.
pub fn simulate_locked_run(plan: &LockedRunPlan) -> Vec<(usize, CountRecord)> {
    let total = 3 * plan.dots_per_segment;
    let drifts = drift_walk(plan.seed, plan.drift_sigma, total);
    (0..total)
        .map(|dot| {
            let segment = dot / plan.dots_per_segment;
            let cfg = OpticalConfig::new(plan.lock_phase + drifts[dot], plan.epsilon)
                .expect("validated plan parameters");
            let lambda =
                plan.mean_counts * ideal_coincidence_rate(&plan.segment_states[segment], &cfg);
            let counts = draw_counts(&mut point_stream(plan.seed, dot), lambda);
            (segment, CountRecord { phase_nominal: plan.lock_phase, counts })
        })
        .collect()
}

/// Serializes sweep records (segment column fixed at 0).
pub fn sweep_to_csv(records: &[CountRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!("0,{},{}\n", r.phase_nominal, r.counts));
    }
    out
}

/// Serializes locked-run records with their segment indices.
pub fn locked_to_csv(records: &[(usize, CountRecord)]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (segment, r) in records {
        out.push_str(&format!("{},{},{}\n", segment, r.phase_nominal, r.counts));
    }
    out
}
