//! Small dense quantum registers: pure states, density matrices, operators
//! and the scalar metrics evaluated on them.

pub mod linalg;
mod metrics;
mod mub;

use std::fmt;

pub use linalg::{CMatrix, CVector, C64};
pub use metrics::{concurrence, entanglement_of_formation, eof_from_concurrence, partial_trace, purity, state_fidelity};
pub use mub::MubState;

use crate::error::{Error, Result};
use linalg::{hermitian_defect, hermitian_eigenvalues, max_abs_diff, qubits_for_dim, trace, ONE, ZERO};

pub const NORM_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = -1e-10;
pub const UNITARY_TOL: f64 = 1e-12;

/// Kronecker composition; the left operand becomes the more significant qubits.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Self;
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
    qubits: usize,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let qubits = qubits_for_dim(amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { amplitudes, qubits })
    }

    /// Normalises the vector first; fails only on a zero vector.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm < 1e-300 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(amplitudes.unscale(norm))
    }

    pub fn basis(qubits: usize, index: usize) -> Self {
        let dim = 1usize << qubits;
        assert!(index < dim, "basis index out of range");
        let mut v = CVector::zeros(dim);
        v[index] = ONE;
        Self { amplitudes: v, qubits }
    }

    pub fn from_label(label: MubState) -> Self {
        Self {
            amplitudes: label.vector(),
            qubits: 1,
        }
    }

    /// Product state of single-qubit labels, first label most significant.
    pub fn product(labels: &[MubState]) -> Self {
        let mut it = labels.iter();
        let first = Self::from_label(*it.next().expect("at least one label"));
        it.fold(first, |acc, &l| acc.tensor(&Self::from_label(l)))
    }

    /// `(|0...0> + |1...1>) / sqrt(2)` style maximally entangled state of
    /// `2n` qubits, pairing qubit `k` with qubit `n + k`.
    pub fn maximally_entangled(n: usize) -> Self {
        let d = 1usize << n;
        let mut v = CVector::zeros(d * d);
        let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
        for i in 0..d {
            v[i * d + i] = amp;
        }
        Self {
            amplitudes: v,
            qubits: 2 * n,
        }
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn conj(&self) -> Self {
        Self {
            amplitudes: self.amplitudes.map(|z| z.conj()),
            qubits: self.qubits,
        }
    }

    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: linalg::outer(&self.amplitudes),
            qubits: self.qubits,
        }
    }
}

impl Tensor for PureState {
    fn tensor(&self, other: &Self) -> Self {
        Self {
            amplitudes: linalg::kron_vec(&self.amplitudes, &other.amplitudes),
            qubits: self.qubits + other.qubits,
        }
    }
}

/// A trace-one, Hermitian, positive semidefinite matrix on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    qubits: usize,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        let qubits = qubits_for_dim(matrix.nrows())?;
        let herm = hermitian_defect(&matrix);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_eig = hermitian_eigenvalues(&matrix).last().copied().unwrap_or(0.0);
        if min_eig < POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { matrix, qubits })
    }

    /// Hermitise and divide by the trace before validating. Used for
    /// post-selected (trace-decreasing) evolutions.
    pub fn from_unnormalized(matrix: CMatrix) -> Result<Self> {
        let tr = trace(&matrix).re;
        if !(tr > 0.0) {
            return Err(Error::InvalidState(format!("non-positive trace {tr}")));
        }
        let m = (&matrix + matrix.adjoint()) * C64::new(0.5 / tr, 0.0);
        Self::new(m)
    }

    pub fn maximally_mixed(qubits: usize) -> Self {
        let d = 1usize << qubits;
        Self {
            matrix: CMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0),
            qubits,
        }
    }

    /// Diagonal single- or multi-qubit state from populations summing to one.
    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        let m = CMatrix::from_diagonal(&CVector::from_iterator(
            populations.len(),
            populations.iter().map(|&p| C64::new(p, 0.0)),
        ));
        Self::new(m)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `<j|rho|j>` for a computational basis index.
    pub fn population(&self, index: usize) -> f64 {
        self.matrix[(index, index)].re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }

    pub fn purity(&self) -> f64 {
        purity(self)
    }

    pub fn fidelity(&self, psi: &PureState) -> Result<f64> {
        state_fidelity(self, psi)
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let diff = &self.matrix - &other.matrix;
        Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum::<f64>())
    }

    /// `U rho U^dagger` for a unitary acting on the whole register.
    pub fn evolve(&self, op: &OperatorMatrix) -> Result<DensityMatrix> {
        if !op.is_unitary() {
            return Err(Error::InvalidOperator("evolve requires a unitary".into()));
        }
        let m = op.sandwich(&self.matrix)?;
        Ok(Self {
            matrix: (&m + m.adjoint()) * C64::new(0.5, 0.0),
            qubits: self.qubits,
        })
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, other: &Self) -> Self {
        Self {
            matrix: linalg::kron(&self.matrix, &other.matrix),
            qubits: self.qubits + other.qubits,
        }
    }
}

impl fmt::Display for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|c| {
                    let z = self.matrix[(r, c)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// A general `2^m x 2^n` complex matrix on a register. Gates carry the
/// `unitary` flag; post-selection filters and isometries do not.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    matrix: CMatrix,
    out_qubits: usize,
    in_qubits: usize,
    unitary: bool,
}

impl OperatorMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let out_qubits = qubits_for_dim(matrix.nrows())?;
        let in_qubits = qubits_for_dim(matrix.ncols())?;
        Ok(Self {
            matrix,
            out_qubits,
            in_qubits,
            unitary: false,
        })
    }

    /// Validates `U^dagger U = I` within `UNITARY_TOL`.
    pub fn unitary(matrix: CMatrix) -> Result<Self> {
        let mut op = Self::new(matrix)?;
        if op.in_qubits != op.out_qubits {
            return Err(Error::InvalidOperator("unitary must be square".into()));
        }
        let d = op.matrix.nrows();
        let defect = max_abs_diff(&(op.matrix.adjoint() * &op.matrix), &CMatrix::identity(d, d));
        if defect > UNITARY_TOL {
            return Err(Error::InvalidOperator(format!("not unitary (defect {defect:e})")));
        }
        op.unitary = true;
        Ok(op)
    }

    pub fn identity(qubits: usize) -> Self {
        let d = 1usize << qubits;
        Self {
            matrix: CMatrix::identity(d, d),
            out_qubits: qubits,
            in_qubits: qubits,
            unitary: true,
        }
    }

    pub fn pauli(axis: Axis) -> Self {
        let m = match axis {
            Axis::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            Axis::Y => CMatrix::from_row_slice(2, 2, &[ZERO, -linalg::I, linalg::I, ZERO]),
            Axis::Z => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        };
        Self {
            matrix: m,
            out_qubits: 1,
            in_qubits: 1,
            unitary: true,
        }
    }

    /// `R_k(xi) = exp(i xi/2 sigma_k) = cos(xi/2) I + i sin(xi/2) sigma_k`.
    pub fn rotation(axis: Axis, xi: f64) -> Self {
        let c = C64::new((xi / 2.0).cos(), 0.0);
        let s = C64::new(0.0, (xi / 2.0).sin());
        let sigma = Self::pauli(axis).matrix;
        Self {
            matrix: CMatrix::identity(2, 2) * c + sigma * s,
            out_qubits: 1,
            in_qubits: 1,
            unitary: true,
        }
    }

    /// Diagonal unitary from phases `exp(i theta_j)`.
    pub fn diagonal_phases(phases: &[f64]) -> Result<Self> {
        let m = CMatrix::from_diagonal(&CVector::from_iterator(
            phases.len(),
            phases.iter().map(|&t| C64::from_polar(1.0, t)),
        ));
        Self::unitary(m)
    }

    /// Rank-one projector `|psi><psi|`.
    pub fn projector(psi: &PureState) -> Self {
        Self {
            matrix: linalg::outer(psi.amplitudes()),
            out_qubits: psi.qubits(),
            in_qubits: psi.qubits(),
            unitary: false,
        }
    }

    /// Lift onto `targets` of an `n`-qubit register.
    pub fn embed(&self, targets: &[usize], n: usize) -> Result<Self> {
        if self.in_qubits != self.out_qubits {
            return Err(Error::InvalidOperator("only square operators can be embedded".into()));
        }
        Ok(Self {
            matrix: linalg::embed(&self.matrix, targets, n)?,
            out_qubits: n,
            in_qubits: n,
            unitary: self.unitary,
        })
    }

    /// Applies `self` when every control qubit is in its listed state
    /// (`true` for `|1>`, `false` for `|0>`), identity otherwise.
    pub fn controlled(&self, controls: &[(usize, bool)], targets: &[usize], n: usize) -> Result<Self> {
        let qubits: Vec<usize> = controls.iter().map(|c| c.0).chain(targets.iter().copied()).collect();
        linalg::check_distinct(&qubits, n)?;
        let full = self.embed(targets, n)?;
        let dim = 1usize << n;
        let mut m = CMatrix::identity(dim, dim);
        for r in 0..dim {
            let active = controls
                .iter()
                .all(|&(q, one)| linalg::bit(r, q, n) == usize::from(one));
            if active {
                for c in 0..dim {
                    m[(r, c)] = full.matrix[(r, c)];
                }
            }
        }
        Ok(Self {
            matrix: m,
            out_qubits: n,
            in_qubits: n,
            unitary: self.unitary,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn in_qubits(&self) -> usize {
        self.in_qubits
    }

    pub fn out_qubits(&self) -> usize {
        self.out_qubits
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn dagger(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            out_qubits: self.in_qubits,
            in_qubits: self.out_qubits,
            unitary: self.unitary,
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            matrix: &self.matrix * factor,
            out_qubits: self.out_qubits,
            in_qubits: self.in_qubits,
            unitary: self.unitary && (factor.norm() - 1.0).abs() < UNITARY_TOL,
        }
    }

    /// Operator product `self * rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &OperatorMatrix) -> Result<Self> {
        if self.in_qubits != rhs.out_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.in_qubits,
                found: 1 << rhs.out_qubits,
            });
        }
        Ok(Self {
            matrix: &self.matrix * &rhs.matrix,
            out_qubits: self.out_qubits,
            in_qubits: rhs.in_qubits,
            unitary: self.unitary && rhs.unitary,
        })
    }

    pub fn apply(&self, psi: &PureState) -> Result<CVector> {
        if self.matrix.ncols() != psi.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.ncols(),
                found: psi.dim(),
            });
        }
        Ok(&self.matrix * psi.amplitudes())
    }

    /// `K m K^dagger` without normalisation.
    pub fn sandwich(&self, m: &CMatrix) -> Result<CMatrix> {
        if self.matrix.ncols() != m.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.ncols(),
                found: m.nrows(),
            });
        }
        Ok(&self.matrix * m * self.matrix.adjoint())
    }

    /// Largest eigenvalue of `F^dagger F`; at most one for a physical filter.
    pub fn max_transmission(&self) -> f64 {
        let g = self.matrix.adjoint() * &self.matrix;
        hermitian_eigenvalues(&g).first().copied().unwrap_or(0.0)
    }
}

impl Tensor for OperatorMatrix {
    fn tensor(&self, other: &Self) -> Self {
        Self {
            matrix: linalg::kron(&self.matrix, &other.matrix),
            out_qubits: self.out_qubits + other.out_qubits,
            in_qubits: self.in_qubits + other.in_qubits,
            unitary: self.unitary && other.unitary,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_tensor_identity_is_identity() {
        let i2 = OperatorMatrix::identity(1);
        let i4 = i2.tensor(&i2);
        assert_eq!(i4.matrix(), OperatorMatrix::identity(2).matrix());
        assert!(i4.is_unitary());
    }

    #[test]
    fn zero_tensor_one_is_e1() {
        let v = PureState::basis(1, 0).tensor(&PureState::basis(1, 1));
        assert_eq!(v, PureState::basis(2, 1));
    }

    #[test]
    fn zz_on_11_is_plus() {
        let z = OperatorMatrix::pauli(Axis::Z);
        let zz = z.tensor(&z);
        let out = zz.apply(&PureState::basis(2, 3)).unwrap();
        assert!((out[3] - ONE).norm() < 1e-15);
    }

    #[test]
    fn rotation_matches_closed_form() {
        let r = OperatorMatrix::rotation(Axis::Y, std::f64::consts::PI);
        // exp(i pi/2 sigma_y) = i sigma_y
        let expected = OperatorMatrix::pauli(Axis::Y).scale(linalg::I);
        assert!(max_abs_diff(r.matrix(), expected.matrix()) < 1e-15);
    }

    #[test]
    fn density_validation_rejects_bad_trace() {
        let m = CMatrix::identity(2, 2);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn density_validation_rejects_negative() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![C64::new(1.1, 0.0), C64::new(-0.1, 0.0)]));
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn pure_state_rejects_unnormalised() {
        let v = CVector::from_vec(vec![ONE, ONE]);
        assert!(PureState::new(v.clone()).is_err());
        assert!(PureState::normalized(v).is_ok());
    }

    #[test]
    fn controlled_on_zero_polarity() {
        let x = OperatorMatrix::pauli(Axis::X);
        let cx0 = x.controlled(&[(0, false)], &[1], 2).unwrap();
        // |00> -> |01>, |10> -> |10>
        let out = cx0.apply(&PureState::basis(2, 0)).unwrap();
        assert!((out[1] - ONE).norm() < 1e-15);
        let out = cx0.apply(&PureState::basis(2, 2)).unwrap();
        assert!((out[2] - ONE).norm() < 1e-15);
    }

    #[test]
    fn unitary_check_rejects_projector() {
        let p = OperatorMatrix::projector(&PureState::basis(1, 0));
        assert!(OperatorMatrix::unitary(p.into_matrix()).is_err());
    }
}
