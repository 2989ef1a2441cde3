//! Exact density-matrix pipeline of the protocol and reference circuits.
//!
//! Registers are `(P, S, E)`. The returned signal-environment operator is
//! unnormalised: its trace is the coincidence probability relative to
//! maximal gate transmittance.

use nalgebra::{DMatrix, SymmetricEigen};

use super::{EnvState, Mode, NoiseParams, MAX_TRANSMITTANCE};
use crate::error::{Error, Result};
use crate::optical_gate::ccp_kraus;
use crate::protocol::{bright_herald_state, dark_herald_state, u_cp, CouplingStrength};
use crate::qmath::linalg::{self, CMatrix, C64, I};
use crate::qmath::{entanglement_of_formation, DensityMatrix, MubState, PureState};

const JITTER_NODES: usize = 24;

/// Nodes and weights of the `n`-point Gauss-Hermite rule for a standard
/// normal variable (Golub-Welsch).
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let j = DMatrix::<f64>::from_fn(n, n, |a, b| {
        if a + 1 == b || b + 1 == a {
            (a.max(b) as f64).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Signal state `V|1> = |psi>`, `V|0> = |psi_perp>`.
fn preparation_gate(psi: MubState) -> CMatrix {
    let a = psi.orthogonal().vector();
    let b = psi.vector();
    CMatrix::from_fn(2, 2, |i, j| if j == 0 { a[i] } else { b[i] })
}

fn projector(v: &PureState) -> CMatrix {
    linalg::outer(v.amplitudes())
}

/// Output for one realisation of the physical coupling strength. The probe
/// analyser is set for the nominal value.
fn output_fixed(
    mode: Mode,
    nominal: CouplingStrength,
    physical: CouplingStrength,
    psi: MubState,
    rho_e: &CMatrix,
    noise: &NoiseParams,
) -> Result<CMatrix> {
    let (probe, signal) = match mode {
        Mode::Protocol => (MubState::Plus, MubState::One),
        Mode::Reference => (MubState::One, psi),
        Mode::GateTomography => {
            return Err(Error::InvalidArgument("gate tomography has no signal pipeline".into()))
        }
    };
    let input = linalg::kron(
        &linalg::kron(&projector(&PureState::from_label(probe)), &projector(&PureState::from_label(signal))),
        rho_e,
    );
    let k = ccp_kraus(physical)?;
    let mut rho = k.sandwich(&input)?;
    if noise.gate_depolarizing > 0.0 {
        let g = noise.gate_depolarizing;
        let tr = linalg::trace(&rho).re;
        rho = rho * C64::new(1.0 - g, 0.0) + CMatrix::identity(8, 8) * C64::new(g * tr / 8.0, 0.0);
    }

    let herald = match mode {
        Mode::Protocol => {
            let w = linalg::embed(&preparation_gate(psi), &[1], 3)?;
            let u = linalg::embed(u_cp(physical).matrix(), &[1, 2], 3)?;
            let t = u * w;
            rho = &t * rho * t.adjoint();
            let e = noise.herald_error;
            projector(&dark_herald_state(nominal)) * C64::new(1.0 - e, 0.0)
                + projector(&bright_herald_state(nominal)) * C64::new(e, 0.0)
        }
        _ => projector(&PureState::from_label(MubState::One)),
    };
    let filtered = linalg::kron(&herald, &CMatrix::identity(4, 4)) * rho;
    let out = linalg::partial_trace_matrix(&filtered, 3, &[1, 2])?;
    Ok((&out + out.adjoint()) * C64::new(0.5 / MAX_TRANSMITTANCE, 0.0))
}

/// Unnormalised `(S, E)` output, averaged over coupling-strength jitter.
pub(crate) fn output_state(
    mode: Mode,
    phi: CouplingStrength,
    psi: MubState,
    rho_e: &DensityMatrix,
    noise: &NoiseParams,
) -> Result<CMatrix> {
    if noise.phase_jitter_std == 0.0 {
        return output_fixed(mode, phi, phi, psi, rho_e.matrix(), noise);
    }
    let (x, w) = gauss_hermite(JITTER_NODES);
    let mut acc = CMatrix::zeros(4, 4);
    for (xi, wi) in x.into_iter().zip(w) {
        let physical = CouplingStrength::wrapped(phi.radians() + noise.phase_jitter_std * xi)?;
        acc += output_fixed(mode, phi, physical, psi, rho_e.matrix(), noise)? * C64::new(wi, 0.0);
    }
    Ok(acc)
}

/// Coupling strength at which the normalised success probability is 1.
pub(crate) fn anchor(mode: Mode) -> CouplingStrength {
    match mode {
        Mode::Reference => CouplingStrength::new(0.0).expect("in range"),
        _ => CouplingStrength::new(std::f64::consts::PI).expect("in range"),
    }
}

/// Exact metrics of one signal state (no shot noise).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct AnalyticPoint {
    pub purity: f64,
    pub fidelity: f64,
    /// Success probability normalised to the mode's anchor point.
    pub success: f64,
    pub p1_env: f64,
}

pub fn analytic_point(
    mode: Mode,
    phi: CouplingStrength,
    psi: MubState,
    env: &EnvState,
    noise: &NoiseParams,
) -> Result<AnalyticPoint> {
    let rho_e = env.density()?;
    let out = output_state(mode, phi, psi, &rho_e, noise)?;
    let weight = linalg::trace(&out).re;
    if !(weight > 0.0) {
        return Err(Error::DegenerateCoupling(format!(
            "no coincidences at phi = {}",
            phi.radians()
        )));
    }
    let anchor_weight = linalg::trace(&output_state(mode, anchor(mode), psi, &rho_e, noise)?).re;
    let joint = DensityMatrix::from_unnormalized(out)?;
    let s = joint.partial_trace(&[0])?;
    let e = joint.partial_trace(&[1])?;
    Ok(AnalyticPoint {
        purity: s.purity(),
        fidelity: s.fidelity(&PureState::from_label(psi))?,
        success: weight / anchor_weight,
        p1_env: e.population(1),
    })
}

/// Choi matrix `(1/2) sum_ab |a><b| ⊗ D(|a><b|)` of a single-qubit map
/// given its outputs on the six states, in `MubState::ALL` order.
pub(crate) fn choi_from_outputs(out: &[CMatrix]) -> CMatrix {
    let half = C64::new(0.5, 0.0);
    let id = (&out[0] + &out[1] + &out[2] + &out[3] + &out[4] + &out[5]) * C64::new(1.0 / 3.0, 0.0);
    let x = &out[2] - &out[3];
    let y = &out[4] - &out[5];
    let z = &out[0] - &out[1];
    let blocks = [
        [(&id + &z) * half, (&x + &y * I) * half],
        [(&x - &y * I) * half, (&id - &z) * half],
    ];
    let mut chi = CMatrix::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            chi.view_mut((2 * a, 2 * b), (2, 2)).copy_from(&(&blocks[a][b] * half));
        }
    }
    chi
}

/// `(E_f, F)` of the signal channel: entanglement of formation of its
/// normalised Choi state and overlap with `|Phi+>`.
pub(crate) fn channel_metrics(chi: &CMatrix) -> Result<(f64, f64)> {
    let rho = DensityMatrix::from_unnormalized(chi.clone())?;
    let f = rho.fidelity(&PureState::maximally_entangled(1))?;
    Ok((entanglement_of_formation(&rho)?, f))
}

/// Exact channel metrics of the signal decoherence map.
pub fn analytic_channel(mode: Mode, phi: CouplingStrength, env: &EnvState, noise: &NoiseParams) -> Result<(f64, f64)> {
    let rho_e = env.density()?;
    let outputs = MubState::ALL
        .into_iter()
        .map(|l| Ok(linalg::partial_trace_matrix(&output_state(mode, phi, l, &rho_e, noise)?, 2, &[0])?))
        .collect::<Result<Vec<_>>>()?;
    channel_metrics(&choi_from_outputs(&outputs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn cs(p: f64) -> CouplingStrength {
        CouplingStrength::new(p).unwrap()
    }

    #[test]
    fn quadrature_integrates_normal_moments() {
        let (x, w) = gauss_hermite(10);
        let m = |k: i32| x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum::<f64>();
        assert!((m(0) - 1.0).abs() < 1e-13);
        assert!(m(1).abs() < 1e-13);
        assert!((m(2) - 1.0).abs() < 1e-12);
        assert!((m(4) - 3.0).abs() < 1e-11);
    }

    #[test]
    fn ideal_protocol_is_perfect() {
        for l in MubState::ALL {
            let p = analytic_point(Mode::Protocol, cs(FRAC_PI_2), l, &EnvState::MaximallyMixed, &NoiseParams::default())
                .unwrap();
            assert!((p.fidelity - 1.0).abs() < 1e-12 && (p.purity - 1.0).abs() < 1e-12);
            assert!(p.p1_env.abs() < 1e-12);
            assert!((p.success - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn reference_dephases_superpositions() {
        let p = analytic_point(Mode::Reference, cs(PI), MubState::Plus, &EnvState::MaximallyMixed, &NoiseParams::default())
            .unwrap();
        assert!((p.fidelity - 0.5).abs() < 1e-12 && (p.purity - 0.5).abs() < 1e-12);
        assert!((p.p1_env - 0.5).abs() < 1e-12);
    }

    #[test]
    fn choi_inversion_of_identity() {
        let outs: Vec<CMatrix> = MubState::ALL.into_iter().map(|l| PureState::from_label(l).density().into_matrix()).collect();
        let chi = choi_from_outputs(&outs);
        let bell = PureState::maximally_entangled(1).density();
        assert!(linalg::max_abs_diff(&chi, bell.matrix()) < 1e-15);
    }

    #[test]
    fn herald_error_leaves_population() {
        let noise = NoiseParams {
            herald_error: 0.05,
            ..NoiseParams::default()
        };
        let p = analytic_point(Mode::Protocol, cs(PI), MubState::Zero, &EnvState::MaximallyMixed, &noise).unwrap();
        assert!((p.p1_env - 0.05).abs() < 1e-12);
    }
}
