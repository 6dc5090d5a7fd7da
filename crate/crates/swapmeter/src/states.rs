//! Polarization states and the optical elements that prepare them.
//!
//! Inputs to the interferometer are single photons in polarization qubits
//! (basis `|H>`, `|V>`) or photon pairs in two-qubit states (basis order
//! `|HH>, |HV>, |VH>, |VV>`). This module provides:
//!
//! - validated [`PureState`] and [`DensityOp`] wrappers around the raw
//!   matrices, with admission tolerances frozen as constants;
//! - the preparation elements: a two-photon source emitting
//!   `a|HH> + b|VV>`, half- and quarter-wave plate Jones matrices, and a
//!   quartz dephasing plate modeled as an off-diagonal decay factor;
//! - parameterized families used throughout the test suites: Werner states,
//!   nonmaximally entangled pairs, and seeded random density operators.
//!
//! Waveplate angles are measured between the optical axis and the vertical
//! axis, in radians. The quarter-wave plate convention is frozen: fast-axis
//! phase `e^{-i pi/4}`, slow-axis `e^{+i pi/4}`, rotated by the plate angle.
//! Any fixed convention produces the same density matrices in every
//! experiment modeled here; it is pinned so tests stay stable.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::qmath::{C64, CMatrix, QmathError};

/// Admission tolerance for density operators: Hermiticity deviation, trace
/// distance from 1 (renormalized below this, rejected above), and the floor
/// on eigenvalues.
pub const DENSITY_ADMIT_TOL: f64 = 1e-10;

/// Admission tolerance on the norm of a pure state's amplitude vector.
pub const PURE_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("state dimension must be 2 or 4, got {got}")]
    BadDimension { got: usize },
    #[error("pure state is not normalized: |amplitudes| = {norm}")]
    NotNormalized { norm: f64 },
    #[error("density matrix is not Hermitian: deviation {deviation:.3e}")]
    NotHermitian { deviation: f64 },
    #[error("density matrix trace {trace} is not 1")]
    BadTrace { trace: f64 },
    #[error("density matrix has negative eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },
    #[error("parameter {name} = {value} outside {expected}")]
    BadParameter { name: &'static str, value: f64, expected: &'static str },
    #[error(transparent)]
    Matrix(#[from] QmathError),
}

/// Sign of the second amplitude in [`nonmax_entangled`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Which basis pair carries the two amplitudes of [`nonmax_entangled`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonmaxBasis {
    /// `cos2t |HH> + sign sin2t |VV>`
    HhVv,
    /// `cos2t |HV> + sign sin2t |VH>`
    HvVh,
}

/// Waveplate kind selector for [`WaveplateSetting`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveplateKind {
    Hwp,
    Qwp,
}

/// A waveplate at angle `theta` (radians) between its optical axis and the
/// vertical axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveplateSetting {
    pub kind: WaveplateKind,
    pub theta: f64,
}

impl WaveplateSetting {
    pub fn new(kind: WaveplateKind, theta: f64) -> Result<Self, StateError> {
        if !theta.is_finite() {
            return Err(StateError::BadParameter {
                name: "theta",
                value: theta,
                expected: "finite radians",
            });
        }
        Ok(Self { kind, theta })
    }

    pub fn jones(&self) -> CMatrix {
        match self.kind {
            WaveplateKind::Hwp => hwp_jones(self.theta),
            WaveplateKind::Qwp => qwp_jones(self.theta),
        }
    }
}

/// A quartz dephasing plate: off-diagonal (H/V basis) survival factor
/// `kappa` in `[0, 1]`.
///
/// The physical plate is characterized by thickness, but the photon
/// coherence length needed to map thickness to `kappa` is not part of this
/// model; `kappa` is taken directly. The 6.5 mm plate used for the
/// benchmark mixed state corresponds to `kappa = 0.58`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephaserSetting {
    kappa: f64,
}

impl DephaserSetting {
    pub fn new(kappa: f64) -> Result<Self, StateError> {
        if !(0.0..=1.0).contains(&kappa) {
            return Err(StateError::BadParameter {
                name: "kappa",
                value: kappa,
                expected: "[0, 1]",
            });
        }
        Ok(Self { kappa })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// A normalized pure polarization state of one photon (dim 2) or a photon
/// pair (dim 4).
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Admits an amplitude vector of length 2 or 4 with unit norm within
    /// [`PURE_NORM_TOL`]. Amplitudes are stored as given, not renormalized.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self, StateError> {
        let dim = amplitudes.len();
        if dim != 2 && dim != 4 {
            return Err(StateError::BadDimension { got: dim });
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > PURE_NORM_TOL {
            return Err(StateError::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &PureState) -> C64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Tensor product with `self` as the first factor.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        PureState { amplitudes }
    }

    /// Projector `|self><self|` as a validated density operator.
    pub fn to_density(&self) -> DensityOp {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        DensityOp::from_matrix(m).expect("projector of a unit vector is a valid density operator")
    }

    /// Applies a (unitary) 2x2 or 4x4 matrix to the state.
    pub fn apply(&self, u: &CMatrix) -> Result<PureState, StateError> {
        assert_eq!(u.cols(), self.dim(), "operator dimension mismatch");
        PureState::new(u.mul_vec(&self.amplitudes))
    }

    pub fn h() -> PureState {
        PureState { amplitudes: vec![C64::ONE, C64::ZERO] }
    }

    pub fn v() -> PureState {
        PureState { amplitudes: vec![C64::ZERO, C64::ONE] }
    }

    pub fn hh() -> PureState {
        PureState::h().tensor(&PureState::h())
    }

    pub fn hv() -> PureState {
        PureState::h().tensor(&PureState::v())
    }

    pub fn vh() -> PureState {
        PureState::v().tensor(&PureState::h())
    }

    pub fn vv() -> PureState {
        PureState::v().tensor(&PureState::v())
    }

    /// `(|HH> + |VV>)/sqrt(2)`
    pub fn phi_plus() -> PureState {
        nonmax_entangled(std::f64::consts::FRAC_PI_8, Sign::Plus, NonmaxBasis::HhVv)
    }

    /// `(|HH> - |VV>)/sqrt(2)`
    pub fn phi_minus() -> PureState {
        nonmax_entangled(std::f64::consts::FRAC_PI_8, Sign::Minus, NonmaxBasis::HhVv)
    }

    /// The singlet `(|HV> - |VH>)/sqrt(2)`, the only antisymmetric
    /// two-qubit state.
    pub fn singlet() -> PureState {
        nonmax_entangled(std::f64::consts::FRAC_PI_8, Sign::Minus, NonmaxBasis::HvVh)
    }

    /// The symmetric triplet `(|HV> + |VH>)/sqrt(2)`.
    pub fn triplet() -> PureState {
        nonmax_entangled(std::f64::consts::FRAC_PI_8, Sign::Plus, NonmaxBasis::HvVh)
    }
}

/// A validated density operator of dimension 2 or 4.
///
/// Admission repairs only rounding-level damage: the matrix is symmetrized,
/// and the trace is renormalized when within [`DENSITY_ADMIT_TOL`] of 1.
/// Larger violations of Hermiticity, trace, or positivity are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOp {
    matrix: CMatrix,
}

impl DensityOp {
    pub fn from_matrix(matrix: CMatrix) -> Result<Self, StateError> {
        let dim = matrix.rows();
        if !matrix.is_square() || (dim != 2 && dim != 4) {
            return Err(StateError::BadDimension { got: dim });
        }
        let deviation = matrix.hermiticity_deviation();
        if deviation > DENSITY_ADMIT_TOL {
            return Err(StateError::NotHermitian { deviation });
        }
        let mut m = matrix.hermitize();
        let trace = m.trace().re;
        if (trace - 1.0).abs() > DENSITY_ADMIT_TOL {
            return Err(StateError::BadTrace { trace });
        }
        if trace != 1.0 {
            m = m.scale_re(1.0 / trace);
        }
        let (eigenvalues, _) = m.hermitian_eigen()?;
        let min = eigenvalues[0];
        if min < -DENSITY_ADMIT_TOL {
            return Err(StateError::NotPositive { min_eigenvalue: min });
        }
        Ok(Self { matrix: m })
    }

    /// Projects an approximately-positive Hermitian matrix onto the nearest
    /// density operator: symmetrize, clamp negative eigenvalues to zero,
    /// renormalize the trace.
    ///
    /// Unlike [`DensityOp::from_matrix`] this accepts any input whose
    /// positive part has nonzero trace, so it is the right constructor for
    /// matrices that are positive by construction but arrive scaled or
    /// polluted by rounding (e.g. post-selected branch sums).
    pub fn project(matrix: &CMatrix) -> Result<Self, StateError> {
        let dim = matrix.rows();
        if !matrix.is_square() || (dim != 2 && dim != 4) {
            return Err(StateError::BadDimension { got: dim });
        }
        let (eigenvalues, vectors) = matrix.hermitize().hermitian_eigen()?;
        let clamped: Vec<f64> = eigenvalues.iter().map(|&x| x.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        if total <= 0.0 {
            return Err(StateError::BadTrace { trace: total });
        }
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = (0..dim)
                    .map(|k| vectors[(i, k)] * (clamped[k] / total) * vectors[(j, k)].conj())
                    .sum();
            }
        }
        Ok(Self { matrix: m.hermitize() })
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self, StateError> {
        if dim != 2 && dim != 4 {
            return Err(StateError::BadDimension { got: dim });
        }
        Ok(Self { matrix: CMatrix::identity(dim).scale_re(1.0 / dim as f64) })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `tr(rho^2)`, real by Hermiticity.
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// `tr(rho sigma)`, real by Hermiticity of both factors.
    pub fn overlap(&self, other: &DensityOp) -> f64 {
        self.expectation(other.matrix()).re
    }

    /// `tr(rho op)` as a complex number; real for Hermitian `op` up to
    /// rounding.
    pub fn expectation(&self, op: &CMatrix) -> C64 {
        (&self.matrix * op).trace()
    }

    /// Tensor product with `self` as the first factor.
    pub fn tensor(&self, other: &DensityOp) -> DensityOp {
        DensityOp { matrix: self.matrix.kron(other.matrix()) }
    }

    /// Conjugation `U rho U^dag` by a unitary.
    pub fn evolve(&self, u: &CMatrix) -> Result<DensityOp, StateError> {
        DensityOp::from_matrix(&(u * &self.matrix) * &u.dagger())
    }
}

/// Two-photon source state `a|HH> + b|VV>` with real amplitudes.
pub fn spdc_source(a: f64, b: f64) -> Result<PureState, StateError> {
    let norm_sq = a * a + b * b;
    if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > PURE_NORM_TOL {
        return Err(StateError::NotNormalized { norm: norm_sq.sqrt() });
    }
    PureState::new(vec![
        C64::new(a, 0.0),
        C64::ZERO,
        C64::ZERO,
        C64::new(b, 0.0),
    ])
}

/// Half-wave plate Jones matrix at angle `theta`:
/// `[[cos2t, sin2t], [sin2t, -cos2t]]`.
pub fn hwp_jones(theta: f64) -> CMatrix {
    // Separate sin/cos calls so the action on |H> is bit-identical to the
    // cos2t/sin2t parametrization used by the verification oracles.
    let c = (2.0 * theta).cos();
    let s = (2.0 * theta).sin();
    CMatrix::from_real(2, &[c, s, s, -c]).expect("finite entries")
}

/// Quarter-wave plate Jones matrix at angle `theta`, in the frozen
/// convention `R(theta) diag(e^{-i pi/4}, e^{+i pi/4}) R(-theta)`.
pub fn qwp_jones(theta: f64) -> CMatrix {
    let (s, c) = theta.sin_cos();
    let f = C64::from_polar(1.0, -std::f64::consts::FRAC_PI_4);
    let g = f.conj();
    let entries = vec![
        f * c * c + g * s * s,
        (f - g) * s * c,
        (f - g) * s * c,
        f * s * s + g * c * c,
    ];
    CMatrix::new(2, 2, entries).expect("finite entries")
}

/// Quartz dephasing: keeps H/V diagonal entries, scales off-diagonal
/// entries by `kappa`.
pub fn apply_quartz(rho: &DensityOp, d: &DephaserSetting) -> DensityOp {
    assert_eq!(rho.dim(), 2, "quartz dephaser acts on single-qubit states");
    let m = rho.matrix();
    let k = d.kappa();
    let mut out = m.clone();
    out[(0, 1)] = m[(0, 1)] * k;
    out[(1, 0)] = m[(1, 0)] * k;
    DensityOp::from_matrix(out).expect("dephasing preserves density operator validity")
}

/// Werner state `p |psi-><psi-| + (1-p) I/4` around the singlet.
pub fn make_werner(p: f64) -> Result<DensityOp, StateError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(StateError::BadParameter { name: "p", value: p, expected: "[0, 1]" });
    }
    let singlet = PureState::singlet().to_density();
    let mixed = CMatrix::identity(4).scale_re((1.0 - p) / 4.0);
    let m = &singlet.matrix().scale_re(p) + &mixed;
    DensityOp::from_matrix(m)
}

/// Nonmaximally entangled pure state `cos2t |x> + sign sin2t |y>` on the
/// chosen basis pair.
pub fn nonmax_entangled(theta: f64, sign: Sign, basis: NonmaxBasis) -> PureState {
    let (c, s) = ((2.0 * theta).cos(), (2.0 * theta).sin() * sign.factor());
    let (i, j) = match basis {
        NonmaxBasis::HhVv => (0, 3),
        NonmaxBasis::HvVh => (1, 2),
    };
    let mut amplitudes = vec![C64::ZERO; 4];
    amplitudes[i] = C64::new(c, 0.0);
    amplitudes[j] = C64::new(s, 0.0);
    PureState::new(amplitudes).expect("cos/sin pair is normalized")
}

/// Seeded random density operator of the requested dimension and rank,
/// built from a complex Gaussian rectangular factor `G` as
/// `G G^dag / tr(G G^dag)`.
pub fn random_density(seed: u64, dim: usize, rank: usize) -> Result<DensityOp, StateError> {
    if dim != 2 && dim != 4 {
        return Err(StateError::BadDimension { got: dim });
    }
    if rank == 0 || rank > dim {
        return Err(StateError::BadParameter {
            name: "rank",
            value: rank as f64,
            expected: "1..=dim",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut g = CMatrix::zeros(dim, rank);
    for i in 0..dim {
        for j in 0..rank {
            g[(i, j)] = C64::new(draw(), draw());
        }
    }
    let gg = (&g * &g.dagger()).hermitize();
    let trace = gg.trace().re;
    DensityOp::from_matrix(gg.scale_re(1.0 / trace))
}
