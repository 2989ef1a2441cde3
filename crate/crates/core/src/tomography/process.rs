use crate::error::{Error, Result};
use crate::qmath::linalg::{self, CMatrix, C64};
use crate::qmath::{DensityMatrix, OperatorMatrix, PureState, POSITIVITY_TOL};

/// Choi matrix `chi = (I ⊗ E)(Phi_n)` of an `n`-qubit channel, with the
/// reference half on the first `n` qubits and `Phi_n` normalised. The trace
/// is the channel's average transmission.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessMatrix {
    chi: CMatrix,
    n: usize,
}

impl ProcessMatrix {
    pub fn new(chi: CMatrix, n: usize) -> Result<Self> {
        let d = 1usize << (2 * n);
        if chi.nrows() != d || chi.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: chi.nrows(),
            });
        }
        let scale = linalg::trace(&chi).re.abs().max(1.0);
        let herm = linalg::hermitian_defect(&chi);
        if herm > 1e-12 * scale {
            return Err(Error::InvalidState(format!("process matrix not Hermitian (defect {herm:e})")));
        }
        let chi = (&chi + chi.adjoint()) * C64::new(0.5, 0.0);
        let min = linalg::hermitian_eigenvalues(&chi).last().copied().unwrap_or(0.0);
        if min < POSITIVITY_TOL * scale {
            return Err(Error::InvalidState(format!("process matrix has eigenvalue {min:e}")));
        }
        Ok(Self { chi, n })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.chi
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.chi).re
    }

    /// `chi / Tr[chi]` as a `2n`-qubit state.
    pub fn normalized(&self) -> Result<DensityMatrix> {
        DensityMatrix::from_unnormalized(self.chi.clone())
    }
}

/// Exact Choi matrix of the channel with the given Kraus operators.
pub fn channel_to_choi(kraus: &[OperatorMatrix], n: usize) -> Result<ProcessMatrix> {
    let d = 1usize << n;
    if kraus.is_empty() {
        return Err(Error::InvalidArgument("channel needs at least one Kraus operator".into()));
    }
    let phi = PureState::maximally_entangled(n);
    let mut chi = CMatrix::zeros(d * d, d * d);
    for k in kraus {
        if k.matrix().nrows() != d || k.matrix().ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: k.matrix().nrows(),
            });
        }
        let v = linalg::kron(&CMatrix::identity(d, d), k.matrix()) * phi.amplitudes();
        chi += linalg::outer(&v);
    }
    ProcessMatrix::new(chi, n)
}

/// Inverse duality: `E(rho) = d Tr_ref[(rho^T ⊗ I) chi]`.
pub fn apply_choi(chi: &ProcessMatrix, rho: &CMatrix) -> Result<CMatrix> {
    let d = 1usize << chi.n;
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho.nrows(),
        });
    }
    let lifted = linalg::kron(&rho.transpose(), &CMatrix::identity(d, d)) * &chi.chi;
    let keep: Vec<usize> = (chi.n..2 * chi.n).collect();
    Ok(linalg::partial_trace_matrix(&lifted, 2 * chi.n, &keep)? * C64::new(d as f64, 0.0))
}

/// `Tr[chi chi_ideal] / (Tr[chi] Tr[chi_ideal])`.
pub fn process_fidelity(chi: &ProcessMatrix, chi_ideal: &ProcessMatrix) -> Result<f64> {
    if chi.n != chi_ideal.n {
        return Err(Error::DimensionMismatch {
            expected: chi_ideal.n,
            found: chi.n,
        });
    }
    let (a, b) = (positive_trace(chi)?, positive_trace(chi_ideal)?);
    let overlap: f64 = chi
        .chi
        .iter()
        .zip(chi_ideal.chi.transpose().iter())
        .map(|(x, y)| (x * y).re)
        .sum();
    Ok((overlap / (a * b)).clamp(0.0, 1.0))
}

/// `Tr[chi^2] / Tr[chi]^2`.
pub fn process_purity(chi: &ProcessMatrix) -> Result<f64> {
    let t = positive_trace(chi)?;
    let sq: f64 = chi.chi.iter().map(|z| z.norm_sqr()).sum();
    Ok((sq / (t * t)).min(1.0))
}

fn positive_trace(chi: &ProcessMatrix) -> Result<f64> {
    let t = chi.trace();
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("process matrix has zero trace".into()));
    }
    Ok(t)
}
