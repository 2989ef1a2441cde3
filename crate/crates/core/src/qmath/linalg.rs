//! Dense complex matrix helpers shared by the state and operator types.
//!
//! Qubit `0` is always the leftmost tensor factor, i.e. the most significant
//! bit of a basis index.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Number of qubits spanned by a dimension, or an error when it is not `2^n`.
pub fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotQubitDimension(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Largest elementwise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermitian_defect(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Eigen-decomposition of a Hermitian matrix. The input is symmetrised first
/// so round-off in the anti-Hermitian part never leaks into the spectrum.
pub fn hermitian_eigen(m: &CMatrix) -> SymmetricEigen<C64, nalgebra::Dyn> {
    let n = m.nrows();
    let sym = faer::Mat::<faer::c64>::from_fn(n, n, |i, j| {
        let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
        faer::c64::new(z.re, z.im)
    });
    match sym.self_adjoint_eigen(faer::Side::Lower) {
        Ok(e) => {
            let (s, u) = (e.S(), e.U());
            SymmetricEigen {
                eigenvalues: DVector::from_fn(n, |i, _| s[i].re),
                eigenvectors: CMatrix::from_fn(n, n, |i, j| C64::new(u[(i, j)].re, u[(i, j)].im)),
            }
        }
        Err(_) => SymmetricEigen::new((m + m.adjoint()) * C64::new(0.5, 0.0)),
    }
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = hermitian_eigen(m).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Principal square root of a positive semidefinite matrix; eigenvalues at
/// round-off level are set to zero.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let eig = hermitian_eigen(m);
    let floor = 16.0 * f64::EPSILON * eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues
            .iter()
            .map(|&l| C64::new(if l > floor { l.sqrt() } else { 0.0 }, 0.0)),
    ));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Inverse square root of a positive definite matrix.
pub fn pd_inv_sqrt(m: &CMatrix) -> Option<CMatrix> {
    let eig = hermitian_eigen(m);
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if eig.eigenvalues.iter().any(|&l| l <= max * 1e-12) {
        return None;
    }
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| C64::new(1.0 / l.sqrt(), 0.0)),
    ));
    Some(&eig.eigenvectors * d * eig.eigenvectors.adjoint())
}

#[inline]
pub fn bit(index: usize, qubit: usize, n: usize) -> usize {
    (index >> (n - 1 - qubit)) & 1
}

/// Lift an operator acting on `targets` (in the given order, first target
/// most significant) to the full `n`-qubit register.
pub fn embed(op: &CMatrix, targets: &[usize], n: usize) -> Result<CMatrix> {
    let k = targets.len();
    if op.nrows() != 1 << k || op.ncols() != 1 << k {
        return Err(Error::DimensionMismatch {
            expected: 1 << k,
            found: op.nrows(),
        });
    }
    check_distinct(targets, n)?;
    let dim = 1usize << n;
    let mut rest_mask = dim - 1;
    for &t in targets {
        rest_mask &= !(1 << (n - 1 - t));
    }
    let sub = |i: usize| -> usize {
        targets
            .iter()
            .fold(0usize, |acc, &t| (acc << 1) | bit(i, t, n))
    };
    let mut out = CMatrix::zeros(dim, dim);
    for r in 0..dim {
        let sr = sub(r);
        for c in 0..dim {
            if r & rest_mask != c & rest_mask {
                continue;
            }
            out[(r, c)] = op[(sr, sub(c))];
        }
    }
    Ok(out)
}

pub(crate) fn check_distinct(qubits: &[usize], n: usize) -> Result<()> {
    for (i, &q) in qubits.iter().enumerate() {
        if q >= n {
            return Err(Error::InvalidQubits(format!(
                "qubit {q} out of range for a {n}-qubit register"
            )));
        }
        if qubits[..i].contains(&q) {
            return Err(Error::InvalidQubits(format!("qubit {q} listed twice")));
        }
    }
    Ok(())
}

/// Partial trace of a (not necessarily normalised) square matrix on `n`
/// qubits, keeping `keep` in ascending register order.
pub fn partial_trace_matrix(m: &CMatrix, n: usize, keep: &[usize]) -> Result<CMatrix> {
    if keep.is_empty() {
        return Err(Error::InvalidQubits("keep set is empty".into()));
    }
    check_distinct(keep, n)?;
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let k = keep.len();
    let dk = 1usize << k;
    let dt = 1usize << traced.len();
    let compose = |kept: usize, tr: usize| -> usize {
        let mut idx = 0usize;
        for q in 0..n {
            let b = if let Some(p) = keep.iter().position(|&x| x == q) {
                (kept >> (k - 1 - p)) & 1
            } else {
                let p = traced.iter().position(|&x| x == q).unwrap();
                (tr >> (traced.len() - 1 - p)) & 1
            };
            idx = (idx << 1) | b;
        }
        idx
    };
    let mut out = CMatrix::zeros(dk, dk);
    for r in 0..dk {
        for c in 0..dk {
            let mut acc = ZERO;
            for t in 0..dt {
                acc += m[(compose(r, t), compose(c, t))];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

pub fn binary_entropy(p: f64) -> f64 {
    let h = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    h(p) + h(1.0 - p)
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.log2())
        .sum()
}
