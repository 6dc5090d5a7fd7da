//! Dense complex matrices for two- and four-dimensional polarization
//! calculations.
//!
//! Everything in the crate reduces to small Hermitian matrix work: density
//! operators are 2x2 or 4x4, optical elements are 2x2 unitaries, and the
//! verification oracles need eigenvalues and a positive-semidefinite square
//! root. At these sizes a handful of dense routines beats pulling in a
//! linear-algebra stack, so matrices are stored row-major in a flat `Vec`
//! and the eigensolver is a cyclic Jacobi iteration specialized to Hermitian
//! input.
//!
//! Conventions used throughout:
//!
//! - Two-qubit basis order is `|HH>, |HV>, |VH>, |VV>`, i.e. subsystem A is
//!   the most significant (first) tensor factor.
//! - [`Subsystem::A`] always refers to that first factor, both for partial
//!   transposition and for partial tracing.
//! - Eigenvalues come back sorted ascending, with the eigenvector columns
//!   permuted to match.

use thiserror::Error;

pub use num_complex::Complex64 as C64;

/// Hermiticity admission tolerance: largest allowed `|a_ij - conj(a_ji)|`.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Eigenvalue admission tolerance for the PSD square root: eigenvalues in
/// `[-PSD_EIG_TOL, 0)` are clamped to zero, anything lower is rejected.
pub const PSD_EIG_TOL: f64 = 1e-10;

/// Jacobi convergence threshold, relative to the Frobenius norm of the
/// input: iteration stops once the off-diagonal Frobenius norm drops below
/// `JACOBI_REL_TOL * ||A||_F`.
pub const JACOBI_REL_TOL: f64 = 1e-13;

const JACOBI_MAX_SWEEPS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QmathError {
    #[error("matrix data has {got} entries, expected {rows}x{cols} = {}", rows * cols)]
    BadShape { rows: usize, cols: usize, got: usize },
    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("operation requires a {expected}x{expected} matrix, got {rows}x{cols}")]
    BadDimension { expected: usize, rows: usize, cols: usize },
    #[error("matrix is not Hermitian: max |a_ij - conj(a_ji)| = {deviation:.3e}")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive semidefinite: min eigenvalue = {min_eigenvalue:.3e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },
}

/// Which tensor factor of a two-qubit operator an operation acts on.
///
/// `A` is the first (most significant) factor in the `|HH>, |HV>, |VH>,
/// |VV>` basis order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl CMatrix {
    /// Builds a matrix from row-major data, rejecting shape mismatches and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self, QmathError> {
        if entries.len() != rows * cols {
            return Err(QmathError::BadShape { rows, cols, got: entries.len() });
        }
        for (k, z) in entries.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(QmathError::NonFinite { row: k / cols, col: k % cols });
            }
        }
        Ok(Self { rows, cols, entries })
    }

    /// Builds a square matrix from real row-major data.
    pub fn from_real(n: usize, entries: &[f64]) -> Result<Self, QmathError> {
        Self::new(n, n, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![C64::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::ONE;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise deviation from the Hermitian condition.
    pub fn hermiticity_deviation(&self) -> f64 {
        assert!(self.is_square(), "hermiticity of a non-square matrix");
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Hermitian part `(A + A^dag) / 2`, Hermitian to the bit: entry (i, j)
    /// and entry (j, i) are computed from the same pair of inputs.
    pub fn hermitize(&self) -> CMatrix {
        assert!(self.is_square(), "hermitize of a non-square matrix");
        let n = self.rows;
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = C64::new(self[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let z = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn conj(&self) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, z: C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&w| w * z).collect(),
        }
    }

    pub fn scale_re(&self, x: f64) -> CMatrix {
        self.scale(C64::new(x, 0.0))
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Kronecker product, with `self` as the first (most significant)
    /// factor.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self[(i1, j1)];
                for i2 in 0..other.rows {
                    for j2 in 0..other.cols {
                        out[(i1 * other.rows + i2, j1 * other.cols + j2)] = a * other[(i2, j2)];
                    }
                }
            }
        }
        out
    }

    /// Transposes one tensor factor of a 4x4 two-qubit operator.
    pub fn partial_transpose(&self, sub: Subsystem) -> Result<CMatrix, QmathError> {
        self.require_two_qubit()?;
        let mut out = CMatrix::zeros(4, 4);
        for i1 in 0..2 {
            for i2 in 0..2 {
                for j1 in 0..2 {
                    for j2 in 0..2 {
                        let (r, c) = match sub {
                            Subsystem::A => (j1 * 2 + i2, i1 * 2 + j2),
                            Subsystem::B => (i1 * 2 + j2, j1 * 2 + i2),
                        };
                        out[(r, c)] = self[(i1 * 2 + i2, j1 * 2 + j2)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Traces out one tensor factor of a 4x4 two-qubit operator, keeping
    /// `keep`.
    pub fn partial_trace(&self, keep: Subsystem) -> Result<CMatrix, QmathError> {
        self.require_two_qubit()?;
        let mut out = CMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                out[(i, j)] = match keep {
                    Subsystem::A => self[(i * 2, j * 2)] + self[(i * 2 + 1, j * 2 + 1)],
                    Subsystem::B => self[(i, j)] + self[(2 + i, 2 + j)],
                };
            }
        }
        Ok(out)
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
    ///
    /// The input is admitted if its largest deviation from Hermiticity is at
    /// most [`HERMITICITY_TOL`], then symmetrized before iterating.
    /// Returns eigenvalues sorted ascending and the unitary whose columns
    /// are the matching eigenvectors.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, CMatrix), QmathError> {
        if !self.is_square() {
            return Err(QmathError::BadDimension {
                expected: self.rows,
                rows: self.rows,
                cols: self.cols,
            });
        }
        let dev = self.hermiticity_deviation();
        if dev > HERMITICITY_TOL {
            return Err(QmathError::NotHermitian { deviation: dev });
        }

        let n = self.rows;
        let mut a = self.hermitize();
        let mut v = CMatrix::identity(n);
        let scale = a.frobenius_norm();
        if scale == 0.0 {
            return Ok((vec![0.0; n], v));
        }

        for _ in 0..JACOBI_MAX_SWEEPS {
            if off_diagonal_norm(&a) <= JACOBI_REL_TOL * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    jacobi_rotate(&mut a, &mut v, p, q, scale);
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
        let mut vectors = CMatrix::zeros(n, n);
        for (new_col, &old_col) in order.iter().enumerate() {
            for r in 0..n {
                vectors[(r, new_col)] = v[(r, old_col)];
            }
        }
        Ok((eigenvalues, vectors))
    }

    /// Hermitian square root of a positive-semidefinite matrix.
    ///
    /// Eigenvalues in `[-PSD_EIG_TOL, 0)` are treated as rounding residue
    /// and clamped to zero; anything below that rejects the input.
    pub fn sqrt_psd(&self) -> Result<CMatrix, QmathError> {
        let (eigenvalues, vectors) = self.hermitian_eigen()?;
        let min = eigenvalues.first().copied().unwrap_or(0.0);
        if min < -PSD_EIG_TOL {
            return Err(QmathError::NotPositiveSemidefinite { min_eigenvalue: min });
        }
        let roots: Vec<f64> = eigenvalues.iter().map(|&x| x.max(0.0).sqrt()).collect();
        let n = self.rows;
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (0..n)
                    .map(|k| vectors[(i, k)] * roots[k] * vectors[(j, k)].conj())
                    .sum();
            }
        }
        Ok(out.hermitize())
    }

    /// Entrywise maximum distance to another matrix of the same shape.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.rows, other.rows, "shape mismatch");
        assert_eq!(self.cols, other.cols, "shape mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    fn require_two_qubit(&self) -> Result<(), QmathError> {
        if self.rows == 4 && self.cols == 4 {
            Ok(())
        } else {
            Err(QmathError::BadDimension { expected: 4, rows: self.rows, cols: self.cols })
        }
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i * self.cols + j]
    }
}

impl std::ops::Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.rows, rhs.rows, "matrix sum shape mismatch");
        assert_eq!(self.cols, rhs.cols, "matrix sum shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(x, y)| x + y).collect(),
        }
    }
}

impl std::ops::Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.rows, rhs.rows, "matrix difference shape mismatch");
        assert_eq!(self.cols, rhs.cols, "matrix difference shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(x, y)| x - y).collect(),
        }
    }
}

impl std::ops::Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// One Jacobi rotation zeroing the (p, q) entry of Hermitian `a`,
/// accumulated into `v`.
///
/// The complex entry `a_pq = r e^{i alpha}` is reduced to the real case by
/// the phase `diag(1, e^{-i alpha})`, then rotated away with the standard
/// real symmetric Jacobi angle.
fn jacobi_rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize, scale: f64) {
    let h = a[(p, q)];
    let r = h.norm();
    if r <= scale * 1e-18 {
        return;
    }
    let alpha = C64::from_polar(1.0, h.arg());
    let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // U is the identity outside rows/columns p and q; on them it is
    //   [ c            s           ]
    //   [-s e^{-ia}    c e^{-ia}   ]
    // so that U^dag A U makes the (p, q) block real and then zeroes it.
    let upp = C64::new(c, 0.0);
    let upq = C64::new(s, 0.0);
    let uqp = -s * alpha.conj();
    let uqq = c * alpha.conj();

    let n = a.rows();
    // A <- A U (columns p and q).
    for i in 0..n {
        let aip = a[(i, p)];
        let aiq = a[(i, q)];
        a[(i, p)] = aip * upp + aiq * uqp;
        a[(i, q)] = aip * upq + aiq * uqq;
    }
    // A <- U^dag A (rows p and q).
    for j in 0..n {
        let apj = a[(p, j)];
        let aqj = a[(q, j)];
        a[(p, j)] = upp.conj() * apj + uqp.conj() * aqj;
        a[(q, j)] = upq.conj() * apj + uqq.conj() * aqj;
    }
    // The rotation is built to annihilate the pair exactly, and the diagonal
    // of a Hermitian matrix is real; assign both rather than keeping the
    // rounding residue.
    a[(p, q)] = C64::ZERO;
    a[(q, p)] = C64::ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    // V <- V U.
    for i in 0..n {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip * upp + viq * uqp;
        v[(i, q)] = vip * upq + viq * uqq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
        c(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        CMatrix::new(n, n, (0..n * n).map(|_| random_complex(rng)).collect()).unwrap()
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        random_matrix(rng, n).hermitize()
    }

    fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        let g = random_matrix(rng, n);
        (&g * &g.dagger()).hermitize()
    }

    #[test]
    fn new_rejects_bad_shape_and_nonfinite() {
        assert!(matches!(
            CMatrix::new(2, 2, vec![C64::ZERO; 3]),
            Err(QmathError::BadShape { got: 3, .. })
        ));
        let mut entries = vec![C64::ZERO; 4];
        entries[2] = c(f64::NAN, 0.0);
        assert!(matches!(
            CMatrix::new(2, 2, entries),
            Err(QmathError::NonFinite { row: 1, col: 0 })
        ));
    }

    #[test]
    fn kron_identity_with_diag_interleaves() {
        let i2 = CMatrix::identity(2);
        let d = CMatrix::from_real(2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let k = i2.kron(&d);
        let expected = CMatrix::from_real(
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 0.0,
            ],
        )
        .unwrap();
        assert_eq!(k, expected);
    }

    #[test]
    fn kron_trace_is_product_of_traces() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_matrix(&mut rng, 2);
            let b = random_matrix(&mut rng, 2);
            let lhs = a.kron(&b).trace();
            let rhs = a.trace() * b.trace();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn kron_mixed_product_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = random_matrix(&mut rng, 2);
        let b = random_matrix(&mut rng, 2);
        let x = random_matrix(&mut rng, 2);
        let y = random_matrix(&mut rng, 2);
        let lhs = &a.kron(&b) * &x.kron(&y);
        let rhs = (&a * &x).kron(&(&b * &y));
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn dagger_is_involutive_and_reverses_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = random_matrix(&mut rng, 4);
        let b = random_matrix(&mut rng, 4);
        assert!(a.dagger().dagger().max_abs_diff(&a) < 1e-15);
        let lhs = (&a * &b).dagger();
        let rhs = &b.dagger() * &a.dagger();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn partial_transpose_of_product_transposes_one_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let a = random_hermitian(&mut rng, 2);
        let b = random_hermitian(&mut rng, 2);
        let joint = a.kron(&b);
        let pt_a = joint.partial_transpose(Subsystem::A).unwrap();
        assert!(pt_a.max_abs_diff(&a.transpose().kron(&b)) < 1e-15);
        let pt_b = joint.partial_transpose(Subsystem::B).unwrap();
        assert!(pt_b.max_abs_diff(&a.kron(&b.transpose())) < 1e-15);
    }

    #[test]
    fn partial_transpose_of_phi_plus_is_half_swap() {
        // |phi+> = (|HH> + |VV>)/sqrt(2), projector entries 1/2 at the
        // corners of the {|HH>, |VV>} block.
        let mut phi = CMatrix::zeros(4, 4);
        for &(i, j) in &[(0usize, 0usize), (0, 3), (3, 0), (3, 3)] {
            phi[(i, j)] = c(0.5, 0.0);
        }
        let pt = phi.partial_transpose(Subsystem::A).unwrap();
        let mut half_swap = CMatrix::zeros(4, 4);
        for &(i, j) in &[(0usize, 0usize), (1, 2), (2, 1), (3, 3)] {
            half_swap[(i, j)] = c(0.5, 0.0);
        }
        assert!(pt.max_abs_diff(&half_swap) < 1e-15);
    }

    #[test]
    fn partial_transpose_is_involutive_and_preserves_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..10 {
            let h = random_hermitian(&mut rng, 4);
            let pt = h.partial_transpose(Subsystem::A).unwrap();
            let back = pt.partial_transpose(Subsystem::A).unwrap();
            assert!(back.max_abs_diff(&h) < 1e-15);
            assert!((pt.trace() - h.trace()).norm() < 1e-13);
            assert!(pt.hermiticity_deviation() < 1e-13);
        }
    }

    #[test]
    fn partial_trace_recovers_product_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let a = random_hermitian(&mut rng, 2);
        let b = random_hermitian(&mut rng, 2);
        // Normalize traces to 1 so the kept factor comes back unscaled.
        let a = a.scale_re(1.0 / a.trace().re);
        let b = b.scale_re(1.0 / b.trace().re);
        let joint = a.kron(&b);
        assert!(joint.partial_trace(Subsystem::A).unwrap().max_abs_diff(&a) < 1e-12);
        assert!(joint.partial_trace(Subsystem::B).unwrap().max_abs_diff(&b) < 1e-12);
        assert!(
            (joint.partial_trace(Subsystem::A).unwrap().trace() - joint.trace()).norm() < 1e-12
        );
    }

    #[test]
    fn partial_trace_of_phi_plus_is_maximally_mixed() {
        let mut phi = CMatrix::zeros(4, 4);
        for &(i, j) in &[(0usize, 0usize), (0, 3), (3, 0), (3, 3)] {
            phi[(i, j)] = c(0.5, 0.0);
        }
        let reduced = phi.partial_trace(Subsystem::A).unwrap();
        assert!(reduced.max_abs_diff(&CMatrix::identity(2).scale_re(0.5)) < 1e-15);
    }

    #[test]
    fn partial_operations_reject_wrong_dimension() {
        let m = CMatrix::identity(2);
        assert!(matches!(
            m.partial_transpose(Subsystem::A),
            Err(QmathError::BadDimension { expected: 4, .. })
        ));
        assert!(matches!(
            m.partial_trace(Subsystem::B),
            Err(QmathError::BadDimension { expected: 4, .. })
        ));
    }

    #[test]
    fn eigen_of_pauli_z_is_plus_minus_one() {
        let z = CMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]).unwrap();
        let (vals, vecs) = z.hermitian_eigen().unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        // Ascending order puts the |V> eigenvector first.
        assert!((vecs[(1, 0)].norm() - 1.0).abs() < 1e-12);
        assert!((vecs[(0, 1)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_of_dephased_state_matrix() {
        let m = CMatrix::from_real(2, &[0.5, 0.29, 0.29, 0.5]).unwrap();
        let (vals, _) = m.hermitian_eigen().unwrap();
        assert!((vals[0] - 0.21).abs() < 1e-12);
        assert!((vals[1] - 0.79).abs() < 1e-12);
    }

    #[test]
    fn eigen_of_complex_offdiagonal_matrix() {
        let m =
            CMatrix::new(2, 2, vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)]).unwrap();
        let (vals, vecs) = m.hermitian_eigen().unwrap();
        assert!(vals[0].abs() < 1e-13);
        assert!((vals[1] - 2.0).abs() < 1e-13);
        // Reconstruction check exercises the complex phase handling.
        let lambda = CMatrix::new(
            2,
            2,
            vec![c(vals[0], 0.0), C64::ZERO, C64::ZERO, c(vals[1], 0.0)],
        )
        .unwrap();
        let rebuilt = &(&vecs * &lambda) * &vecs.dagger();
        assert!(rebuilt.max_abs_diff(&m) < 1e-13);
    }

    #[test]
    fn eigen_of_identity_and_zero() {
        let (vals, vecs) = CMatrix::identity(4).hermitian_eigen().unwrap();
        assert!(vals.iter().all(|&x| (x - 1.0).abs() < 1e-14));
        assert!(vecs.dagger().max_abs_diff(&vecs) < 1e-12);
        let (vals, vecs) = CMatrix::zeros(3, 3).hermitian_eigen().unwrap();
        assert!(vals.iter().all(|&x| x == 0.0));
        assert_eq!(vecs, CMatrix::identity(3));
    }

    #[test]
    fn eigen_reconstructs_random_hermitian_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in [2usize, 4] {
            for _ in 0..20 {
                let h = random_hermitian(&mut rng, n);
                let (vals, vecs) = h.hermitian_eigen().unwrap();
                assert!(vals.windows(2).all(|w| w[0] <= w[1]), "eigenvalues not ascending");
                let gram = &vecs.dagger() * &vecs;
                assert!(gram.max_abs_diff(&CMatrix::identity(n)) < 1e-12);
                let mut lambda = CMatrix::zeros(n, n);
                for (i, &x) in vals.iter().enumerate() {
                    lambda[(i, i)] = c(x, 0.0);
                }
                let rebuilt = &(&vecs * &lambda) * &vecs.dagger();
                assert!(rebuilt.max_abs_diff(&h) < 1e-12 * h.frobenius_norm().max(1.0));
            }
        }
    }

    #[test]
    fn eigen_rejects_non_hermitian_input() {
        let m = CMatrix::from_real(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(m.hermitian_eigen(), Err(QmathError::NotHermitian { .. })));
    }

    #[test]
    fn sqrt_of_diagonal_matrix() {
        let m = CMatrix::from_real(2, &[4.0, 0.0, 0.0, 1.0]).unwrap();
        let s = m.sqrt_psd().unwrap();
        assert!(s.max_abs_diff(&CMatrix::from_real(2, &[2.0, 0.0, 0.0, 1.0]).unwrap()) < 1e-12);
    }

    #[test]
    fn sqrt_of_projector_is_itself() {
        let p = CMatrix::from_real(2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        let s = p.sqrt_psd().unwrap();
        assert!(s.max_abs_diff(&p) < 1e-12);
    }

    #[test]
    fn sqrt_squares_back_and_commutes() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for _ in 0..10 {
            let h = random_psd(&mut rng, 4);
            let s = h.sqrt_psd().unwrap();
            assert!((&s * &s).max_abs_diff(&h) < 1e-9 * h.frobenius_norm().max(1.0));
            let comm = &(&s * &h) - &(&h * &s);
            assert!(comm.frobenius_norm() < 1e-9 * h.frobenius_norm().max(1.0));
            assert!(s.hermiticity_deviation() < 1e-12);
        }
    }

    #[test]
    fn sqrt_clamps_rounding_negatives_but_rejects_real_ones() {
        let tiny = CMatrix::from_real(2, &[1.0, 0.0, 0.0, -5e-11]).unwrap();
        let s = tiny.sqrt_psd().unwrap();
        assert!(s[(1, 1)].norm() < 1e-5);
        let bad = CMatrix::from_real(2, &[1.0, 0.0, 0.0, -1e-6]).unwrap();
        assert!(matches!(bad.sqrt_psd(), Err(QmathError::NotPositiveSemidefinite { .. })));
    }

    proptest! {
        #[test]
        fn prop_eigen_reconstructs_two_qubit_hermitians(
            seed in 0u64..1_000_000,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_hermitian(&mut rng, 4);
            let (vals, vecs) = h.hermitian_eigen().unwrap();
            let mut lambda = CMatrix::zeros(4, 4);
            for (i, &x) in vals.iter().enumerate() {
                lambda[(i, i)] = C64::new(x, 0.0);
            }
            let rebuilt = &(&vecs * &lambda) * &vecs.dagger();
            prop_assert!(rebuilt.max_abs_diff(&h) < 1e-11 * h.frobenius_norm().max(1.0));
        }

        #[test]
        fn prop_kron_trace_multiplicative(seed in 0u64..1_000_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, 2);
            let b = random_matrix(&mut rng, 2);
            let lhs = a.kron(&b).trace();
            let rhs = a.trace() * b.trace();
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}
