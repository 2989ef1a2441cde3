use super::linalg::{self, hermitian_eigenvalues, psd_sqrt, CMatrix, C64};
use super::{DensityMatrix, OperatorMatrix, PureState, Axis};
use crate::error::{Error, Result};

/// Reduced state on `keep` (ascending register order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let m = linalg::partial_trace_matrix(rho.matrix(), rho.qubits(), keep)?;
    DensityMatrix::new((&m + m.adjoint()) * C64::new(0.5, 0.0))
}

/// `<psi|rho|psi>`.
pub fn state_fidelity(rho: &DensityMatrix, psi: &PureState) -> Result<f64> {
    if rho.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: psi.dim(),
        });
    }
    let v = psi.amplitudes();
    let f = v.dotc(&(rho.matrix() * v)).re;
    Ok(f.clamp(0.0, 1.0))
}

/// `Tr[rho^2]`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    // Tr[rho^2] = sum |rho_ij|^2 for Hermitian rho
    rho.matrix().iter().map(|z| z.norm_sqr()).sum::<f64>().min(1.0)
}

/// Wootters concurrence of a two-qubit state.
///
/// The decreasing square roots `l_i` of the spectrum of
/// `rho (Y⊗Y) rho* (Y⊗Y)` are obtained from the Hermitian form
/// `sqrt(rho) rho~ sqrt(rho)`, which shares that spectrum.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    let y = OperatorMatrix::pauli(Axis::Y);
    let yy = linalg::kron(y.matrix(), y.matrix());
    let rho_conj = rho.matrix().map(|z| z.conj());
    let rho_tilde = &yy * rho_conj * &yy;
    let s = psd_sqrt(rho.matrix());
    let m: CMatrix = &s * rho_tilde * &s;
    let e = hermitian_eigenvalues(&m);
    // eigenvalues below round-off would otherwise contribute their square roots
    let floor = 16.0 * f64::EPSILON * e.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let l: Vec<f64> = e
        .into_iter()
        .map(|e| if e > floor { e.sqrt() } else { 0.0 })
        .collect();
    Ok((l[0] - l[1] - l[2] - l[3]).clamp(0.0, 1.0))
}

/// `E_f = h((1 + sqrt(1 - C^2)) / 2)` in ebits.
pub fn entanglement_of_formation(rho: &DensityMatrix) -> Result<f64> {
    let c = concurrence(rho)?;
    Ok(eof_from_concurrence(c))
}

pub fn eof_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    linalg::binary_entropy((1.0 + (1.0 - c * c).max(0.0).sqrt()) / 2.0)
}
