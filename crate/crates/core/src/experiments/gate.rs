use rayon::prelude::*;
use serde::Serialize;

use super::pipeline::gauss_hermite;
use super::{derive_seed, Mode, NoiseParams, ScenarioConfig, MAX_TRANSMITTANCE};
use crate::error::{Error, Result};
use crate::optical_gate::ccp_kraus;
use crate::protocol::{u_ccp, CouplingStrength};
use crate::qmath::linalg::{CMatrix, C64};
use crate::tomography::{
    bootstrap_many, channel_to_choi, mle_process, process_fidelity, process_purity, process_settings,
    simulate_process_counts, BootstrapEstimate, ProcessMatrix, Tomogram,
};

/// Seconds per setting of the `6^6`-setting gate tomography.
pub const GATE_SETTING_DURATION: f64 = 0.1;

const JITTER_NODES: usize = 24;

#[derive(Clone, Debug, Serialize)]
pub struct GatePoint {
    pub phi: f64,
    pub fidelity: BootstrapEstimate,
    pub purity: BootstrapEstimate,
    /// Fidelity after the best local phase shifts of the output qubits.
    pub optimized_fidelity: BootstrapEstimate,
    pub theory_fidelity: f64,
    pub theory_purity: f64,
}

/// Choi matrix of the post-selected gate with depolarising noise and
/// coupling-strength jitter. Its trace is the gate success probability.
pub fn noisy_gate_choi(phi: CouplingStrength, noise: &NoiseParams) -> Result<ProcessMatrix> {
    let single = |p: CouplingStrength| -> Result<CMatrix> {
        let chi = channel_to_choi(&[ccp_kraus(p)?], 3)?;
        let g = noise.gate_depolarizing;
        let white = CMatrix::identity(64, 64) * C64::new(g * chi.trace() / 64.0, 0.0);
        Ok(chi.matrix() * C64::new(1.0 - g, 0.0) + white)
    };
    let m = if noise.phase_jitter_std == 0.0 {
        single(phi)?
    } else {
        let (x, w) = gauss_hermite(JITTER_NODES);
        let mut acc = CMatrix::zeros(64, 64);
        for (xi, wi) in x.into_iter().zip(w) {
            acc += single(CouplingStrength::wrapped(phi.radians() + noise.phase_jitter_std * xi)?)? * C64::new(wi, 0.0);
        }
        acc
    };
    ProcessMatrix::new(m, 3)
}

/// Largest `F_CCP` over phase shifts `diag(1, e^{i theta_k})` on each output
/// qubit. Only the `|ii><jj|` block of `chi` enters, so the search is over
/// three angles: a coarse grid followed by coordinate refinement.
pub fn optimal_local_phase_fidelity(chi: &ProcessMatrix, phi: CouplingStrength) -> Result<f64> {
    if chi.n() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: chi.n(),
        });
    }
    let tr = chi.trace();
    if !(tr > 0.0) {
        return Err(Error::InvalidArgument("process matrix has zero trace".into()));
    }
    let amp = |i: usize| {
        let a = C64::new(1.0 / 8f64.sqrt(), 0.0);
        if i == 7 {
            a * C64::from_polar(1.0, phi.radians())
        } else {
            a
        }
    };
    let block = CMatrix::from_fn(8, 8, |i, j| chi.matrix()[(i * 9, j * 9)]);
    let f = |t: [f64; 3]| {
        let v: Vec<C64> = (0..8)
            .map(|i| {
                let phase: f64 = (0..3).filter(|k| i >> (2 - k) & 1 == 1).map(|k| t[k]).sum();
                amp(i) * C64::from_polar(1.0, phase)
            })
            .collect();
        let mut s = C64::new(0.0, 0.0);
        for i in 0..8 {
            for j in 0..8 {
                s += v[i].conj() * block[(i, j)] * v[j];
            }
        }
        s.re / tr
    };

    const GRID: usize = 24;
    let step = std::f64::consts::TAU / GRID as f64;
    let mut best = ([0.0; 3], f([0.0; 3]));
    for a in 0..GRID {
        for b in 0..GRID {
            for c in 0..GRID {
                let t = [a as f64 * step, b as f64 * step, c as f64 * step];
                let v = f(t);
                if v > best.1 {
                    best = (t, v);
                }
            }
        }
    }
    let mut h = step / 2.0;
    while h > 1e-9 {
        let mut improved = false;
        for k in 0..3 {
            for s in [-h, h] {
                let mut t = best.0;
                t[k] += s;
                let v = f(t);
                if v > best.1 {
                    best = (t, v);
                    improved = true;
                }
            }
        }
        if !improved {
            h /= 2.0;
        }
    }
    Ok(best.1.clamp(0.0, 1.0))
}

/// Simulated `6^6`-setting process tomography of the realised gate at each
/// grid coupling strength. The full run must be requested explicitly.
pub fn run_gate_tomography(config: &ScenarioConfig, full_3q_tomo: bool) -> Result<Vec<GatePoint>> {
    if !full_3q_tomo {
        return Err(Error::BudgetRequired(
            "three-qubit process tomography uses 6^6 settings; pass --full-3q-tomo".into(),
        ));
    }
    if config.mode != Mode::GateTomography {
        return Err(Error::InvalidArgument("run_gate_tomography needs mode = gate_tomography".into()));
    }
    config.validate()?;
    let settings = process_settings(3, GATE_SETTING_DURATION)?;
    let pair_rate = config.rate / MAX_TRANSMITTANCE;
    config
        .phi_grid
        .par_iter()
        .map(|&phi| {
            let truth = noisy_gate_choi(phi, &config.noise)?;
            let ideal = channel_to_choi(&[u_ccp(phi)], 3)?;
            let bits = phi.radians().to_bits();
            let t = simulate_process_counts(&truth, &settings, pair_rate, derive_seed(config.seed, &[0, bits]))?;
            let stat = |x: &Tomogram| {
                let chi = mle_process(x, 3)?;
                Ok(vec![
                    process_fidelity(&chi, &ideal)?,
                    process_purity(&chi)?,
                    optimal_local_phase_fidelity(&chi, phi)?,
                ])
            };
            let e = if config.bootstrap_samples == 0 {
                stat(&t)?.into_iter().map(BootstrapEstimate::exact).collect()
            } else {
                bootstrap_many(&t, stat, config.bootstrap_samples, derive_seed(config.seed, &[1, bits]))?
            };
            Ok(GatePoint {
                phi: phi.radians(),
                fidelity: e[0],
                purity: e[1],
                optimized_fidelity: e[2],
                theory_fidelity: process_fidelity(&truth, &ideal)?,
                theory_purity: process_purity(&truth)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn ideal_gate_choi_is_pure_with_success_trace() {
        let phi = CouplingStrength::new(FRAC_PI_2).unwrap();
        let chi = noisy_gate_choi(phi, &NoiseParams::default()).unwrap();
        assert!((process_purity(&chi).unwrap() - 1.0).abs() < 1e-10);
        assert!((chi.trace() - crate::optical_gate::ccp_success_probability(phi)).abs() < 1e-10);
        let ideal = channel_to_choi(&[u_ccp(phi)], 3).unwrap();
        assert!((process_fidelity(&chi, &ideal).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn full_depolarisation_gives_minimal_purity() {
        let noise = NoiseParams {
            gate_depolarizing: 1.0,
            ..NoiseParams::default()
        };
        let chi = noisy_gate_choi(CouplingStrength::new(1.0).unwrap(), &noise).unwrap();
        assert!((process_purity(&chi).unwrap() - 1.0 / 64.0).abs() < 1e-12);
    }

    #[test]
    fn local_phases_are_recovered() {
        let phi = CouplingStrength::new(FRAC_PI_2).unwrap();
        let z = crate::qmath::OperatorMatrix::diagonal_phases(&[0.0, 0.3]).unwrap();
        let shifted = crate::qmath::Tensor::tensor(&z, &crate::qmath::OperatorMatrix::identity(2));
        let op = shifted.compose(&u_ccp(phi)).unwrap();
        let chi = channel_to_choi(&[op], 3).unwrap();
        let ideal = channel_to_choi(&[u_ccp(phi)], 3).unwrap();
        assert!(process_fidelity(&chi, &ideal).unwrap() < 0.99);
        assert!((optimal_local_phase_fidelity(&chi, phi).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn budget_flag_is_required() {
        let c = ScenarioConfig::new(Mode::GateTomography);
        assert!(matches!(run_gate_tomography(&c, false), Err(Error::BudgetRequired(_))));
    }
}
