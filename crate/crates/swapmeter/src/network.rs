//! Coincidence statistics of the controlled-swap interferometer, computed
//! two redundant ways.
//!
//! The network interferes one photon of pair A with one photon of pair B on
//! a pair of balanced beam splitters, with a piezo-controlled path phase
//! `phi` between the two interfering routes. Post-selecting on the
//! analysis detector pair leaves the two retained photons in the state
//! produced by the operator
//!
//! ```text
//! M(phi) = (e^{i phi} I + S) / 4
//! ```
//!
//! where `S` is the two-qubit swap operator and the 1/4 collects one factor
//! of 1/sqrt(2) per beam splitter. The coincidence probability is then
//! `(1 + eps * v * cos phi) / 8` with visibility `v = tr(rho S)`, which is
//! also available in closed form as [`ideal_coincidence_rate`] (reported in
//! normalized units `r = 8 p` in `[0, 2]`).
//!
//! Both backends are kept deliberately independent — the closed form never
//! touches the post-selection operator — so their agreement is a meaningful
//! check, asserted here on random states and wholesale in the acceptance
//! suite.
//!
//! Imperfect mode overlap at the beam splitters enters as `epsilon` in
//! `[0, 1]`: the detected mixture carries the interfering branch with
//! weight `epsilon` and a non-interfering branch (the two assignment
//! amplitudes added incoherently) with weight `1 - epsilon`. At
//! `epsilon = 1` this reduces to the ideal network.
//!
//! Sign convention, frozen for test stability: `phi = 0` is the
//! constructive maximum for identical product inputs. Beam splitter phase
//! choices shuffle signs between equivalent conventions; only squared
//! amplitudes are observable.

use thiserror::Error;

use crate::qmath::{C64, CMatrix};
use crate::states::DensityOp;

/// Probabilities below this are reported with an undefined conditional
/// state: at a true interference null the post-selected branch vanishes and
/// there is no state to normalize.
pub const PROBABILITY_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("mode-overlap factor epsilon = {value} outside [0, 1]")]
    EpsilonRange { value: f64 },
    #[error("phase must be finite, got {value}")]
    NonFinitePhase { value: f64 },
}

/// The two-qubit swap operator `S`, which doubles as the interference
/// witness: the fringe visibility equals `tr(rho S)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapWitness {
    matrix: CMatrix,
}

impl SwapWitness {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// Interferometer settings: path phase and beam-splitter mode overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalConfig {
    phase: f64,
    epsilon: f64,
}

impl OpticalConfig {
    /// `phase` in radians; `epsilon` is the HOM mode-overlap factor
    /// (1 = indistinguishable photons, 0 = fully distinguishable).
    pub fn new(phase: f64, epsilon: f64) -> Result<Self, NetworkError> {
        if !phase.is_finite() {
            return Err(NetworkError::NonFinitePhase { value: phase });
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(NetworkError::EpsilonRange { value: epsilon });
        }
        Ok(Self { phase, epsilon })
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Outcome of post-selecting on the analysis detector pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PostselectResult {
    /// Coincidence probability, at most 1/4 (one 1/sqrt(2) per beam
    /// splitter).
    pub probability: f64,
    /// Normalized two-photon state given a coincidence; `None` when the
    /// probability is below [`PROBABILITY_FLOOR`].
    pub conditional_state: Option<DensityOp>,
}

/// Builds the swap operator `S|xy> = |yx>`.
pub fn swap_operator() -> SwapWitness {
    let mut m = CMatrix::zeros(4, 4);
    for &(i, j) in &[(0usize, 0usize), (1, 2), (2, 1), (3, 3)] {
        m[(i, j)] = C64::ONE;
    }
    SwapWitness { matrix: m }
}

/// Fringe visibility `tr(rho S)` of a two-photon state.
///
/// Real in `[-1, 1]` because `S` is Hermitian with eigenvalues +-1; the
/// rounding-level imaginary residue is checked and discarded.
pub fn ideal_visibility(rho_ab: &DensityOp) -> f64 {
    assert_eq!(rho_ab.dim(), 4, "visibility is defined for two-photon states");
    let v = rho_ab.expectation(swap_operator().matrix());
    debug_assert!(v.im.abs() <= 1e-12, "visibility imaginary residue {}", v.im);
    v.re
}

/// Closed-form normalized coincidence rate `r(phi) = 1 + eps v cos(phi)`,
/// clamped to its analytic range `[0, 2]` against rounding.
pub fn ideal_coincidence_rate(rho_ab: &DensityOp, cfg: &OpticalConfig) -> f64 {
    let v = ideal_visibility(rho_ab);
    (1.0 + cfg.epsilon() * v * cfg.phase().cos()).clamp(0.0, 2.0)
}

/// Propagates a two-photon state through the network and post-selects on
/// the analysis detector pair.
///
/// The interfering branch applies `M(phi) = (e^{i phi} I + S)/4`; the
/// non-interfering branch adds the two assignment amplitudes incoherently
/// (`M_0 = e^{i phi} I/4` and `M_S = S/4` separately). The reported
/// probability satisfies `8 p = ideal_coincidence_rate` analytically, which
/// the test suites assert numerically.
pub fn optical_postselect(rho_ab: &DensityOp, cfg: &OpticalConfig) -> PostselectResult {
    assert_eq!(rho_ab.dim(), 4, "post-selection is defined for two-photon states");
    let s = swap_operator();
    let rho = rho_ab.matrix();
    let srs = &(s.matrix() * rho) * s.matrix();

    // Interference cross term: e^{i phi} rho S + h.c., assembled in
    // explicitly Hermitian form so the branch sum is Hermitian to the bit.
    let cross = (rho * s.matrix()).scale(C64::from_polar(1.0, cfg.phase())).hermitize();

    let no_interference = &(rho + &srs).scale_re(1.0 / 16.0);
    let interference = &(&(rho + &srs) + &cross.scale_re(2.0)).scale_re(1.0 / 16.0);
    let sigma = &no_interference.scale_re(1.0 - cfg.epsilon())
        + &interference.scale_re(cfg.epsilon());

    let probability = sigma.trace().re;
    let conditional_state = if probability > PROBABILITY_FLOOR {
        Some(
            DensityOp::project(&sigma)
                .expect("branch sum is positive by construction"),
        )
    } else {
        None
    };
    PostselectResult { probability, conditional_state }
}

/// Coincidence probability of two single photons meeting at one balanced
/// beam splitter: `(1 - eps tr(rho_a rho_b)) / 2`.
///
/// This is the dip used to calibrate the mode overlap before running the
/// full network: identical states at `eps = 1` bunch completely.
pub fn hom_coincidence(rho_a: &DensityOp, rho_b: &DensityOp, epsilon: f64) -> f64 {
    assert_eq!(rho_a.dim(), 2, "HOM dip is defined for single-qubit states");
    assert_eq!(rho_b.dim(), 2, "HOM dip is defined for single-qubit states");
    assert!((0.0..=1.0).contains(&epsilon), "epsilon outside [0, 1]");
    (1.0 - epsilon * rho_a.overlap(rho_b)) / 2.0
}
