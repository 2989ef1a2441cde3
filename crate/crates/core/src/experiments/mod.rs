//! Scenario definitions and runners for the protocol and reference sweeps,
//! the decoherence-channel analysis and the CCP gate tomography.
//!
//! Count rates are quoted at maximal transmittance of the post-selected gate
//! (`phi = 0`, where `P_CCP = 1/9`). A tomogram's `rate_reference` is the
//! corresponding pair rate, so reconstructed process matrices carry the
//! physical success probability as their trace.

mod gate;
mod output;
mod pipeline;
mod sweep;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use gate::{noisy_gate_choi, optimal_local_phase_fidelity, run_gate_tomography, GatePoint, GATE_SETTING_DURATION};
pub use output::{write_atomic, write_channel_csv, write_gate_csv, write_manifest, write_sweep_csvs, CSV_HEADER};
pub use pipeline::{analytic_channel, analytic_point, gauss_hermite, AnalyticPoint};
pub use sweep::{
    channel_tomogram, residual_population_report, run_channel_analysis, run_protocol_sweep, run_reference_sweep,
    run_sweep, ChannelPoint, PhiSummary, ScenarioResult, StatePoint,
};

use crate::error::{Error, Result};
use crate::protocol::CouplingStrength;
use crate::qmath::linalg::{CMatrix, C64};
use crate::qmath::{DensityMatrix, MubState, PureState};
use crate::tomography::DEFAULT_BOOTSTRAP_SAMPLES;

/// Success probability of the post-selected gate at maximal transmittance.
pub const MAX_TRANSMITTANCE: f64 = 1.0 / 9.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Protocol,
    Reference,
    GateTomography,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EnvState {
    #[default]
    MaximallyMixed,
    Plus,
    /// Density matrix given as real and imaginary parts, row by row.
    Custom { re: Vec<Vec<f64>>, im: Vec<Vec<f64>> },
}

impl EnvState {
    pub fn density(&self) -> Result<DensityMatrix> {
        match self {
            EnvState::MaximallyMixed => Ok(DensityMatrix::maximally_mixed(1)),
            EnvState::Plus => Ok(PureState::from_label(MubState::Plus).density()),
            EnvState::Custom { re, im } => {
                let ok = re.len() == 2 && im.len() == 2 && re.iter().chain(im).all(|r| r.len() == 2);
                if !ok {
                    return Err(Error::InvalidState("custom environment must be 2 x 2".into()));
                }
                DensityMatrix::new(CMatrix::from_fn(2, 2, |i, j| C64::new(re[i][j], im[i][j])))
            }
        }
    }

    /// Preparations whose weighted sum is the environment state. The
    /// maximally mixed state is produced as an equal blockwise mixture of
    /// the six states of the three mutually unbiased bases.
    pub fn ensemble(&self) -> Result<Vec<(f64, DensityMatrix)>> {
        Ok(match self {
            EnvState::MaximallyMixed => MubState::ALL
                .into_iter()
                .map(|l| (1.0 / 6.0, PureState::from_label(l).density()))
                .collect(),
            other => vec![(1.0, other.density()?)],
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseParams {
    /// Probability that the probe analyser passes the bright outcome
    /// `|phi>` as a herald. Such false heralds leave `|1>` population in
    /// the environment.
    pub herald_error: f64,
    /// Isotropic depolarising strength applied after the CCP stage.
    pub gate_depolarizing: f64,
    /// Standard deviation (radians) of Gaussian fluctuations of the
    /// physical coupling strength.
    pub phase_jitter_std: f64,
}

impl NoiseParams {
    pub fn validate(&self) -> Result<()> {
        self.check().map_err(|(_, e)| e)
    }

    /// Like `validate`, also naming the offending field.
    pub fn check(&self) -> std::result::Result<(), (&'static str, Error)> {
        for (name, v) in [("herald_error", self.herald_error), ("gate_depolarizing", self.gate_depolarizing)] {
            if !(0.0..=1.0).contains(&v) {
                return Err((name, Error::InvalidArgument(format!("noise.{name} = {v} outside [0, 1]"))));
            }
        }
        if !(self.phase_jitter_std >= 0.0 && self.phase_jitter_std.is_finite()) {
            return Err((
                "phase_jitter_std",
                Error::InvalidArgument(format!(
                    "noise.phase_jitter_std = {} must be non-negative",
                    self.phase_jitter_std
                )),
            ));
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        *self == NoiseParams::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub phi_grid: Vec<CouplingStrength>,
    pub env_state: EnvState,
    pub signal_states: Vec<MubState>,
    /// Coincidences per second at maximal transmittance.
    pub rate: f64,
    pub noise: NoiseParams,
    pub seed: u64,
    /// Replicas per bootstrap estimate; 0 skips resampling.
    pub bootstrap_samples: usize,
}

impl ScenarioConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            phi_grid: default_grid(mode),
            env_state: EnvState::MaximallyMixed,
            signal_states: MubState::ALL.to_vec(),
            rate: 300.0,
            noise: NoiseParams::default(),
            seed: 0,
            bootstrap_samples: DEFAULT_BOOTSTRAP_SAMPLES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.check().map_err(|(_, e)| e)
    }

    /// Like `validate`, also naming the offending field (dotted for nested
    /// fields).
    pub fn check(&self) -> std::result::Result<(), (String, Error)> {
        let fail = |k: &str, e: Error| Err((k.to_string(), e));
        if self.phi_grid.is_empty() {
            return fail("phi_grid", Error::InvalidArgument("phi_grid is empty".into()));
        }
        if self.signal_states.is_empty() {
            return fail("signal_states", Error::InvalidArgument("signal_states is empty".into()));
        }
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return fail("rate", Error::InvalidArgument(format!("rate {} must be positive", self.rate)));
        }
        if self.bootstrap_samples == 1 {
            return fail(
                "bootstrap_samples",
                Error::InvalidArgument("bootstrap_samples must be 0 or at least 2".into()),
            );
        }
        if self.mode == Mode::Protocol && self.phi_grid.iter().any(|p| p.is_zero()) {
            return fail(
                "phi_grid",
                Error::DegenerateCoupling("phi = 0 is excluded from protocol grids".into()),
            );
        }
        if let Err((k, e)) = self.noise.check() {
            return fail(&format!("noise.{k}"), e);
        }
        if let Err(e) = self.env_state.density() {
            return fail("env_state", e);
        }
        Ok(())
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::new(Mode::Protocol)
    }
}

/// Protocol: 13 evenly spaced points from `pi/6` to `2pi - pi/6` (which
/// include `pi`). Reference: the same preceded by 0. Gate tomography: 8
/// points `k pi/4`, `k = 0..7`.
pub fn default_grid(mode: Mode) -> Vec<CouplingStrength> {
    let cs = |phi: f64| CouplingStrength::new(phi).expect("in range");
    let open = (0..13).map(|k| cs((6 + 5 * k) as f64 * PI / 36.0));
    match mode {
        Mode::Protocol => open.collect(),
        Mode::Reference => std::iter::once(cs(0.0)).chain(open).collect(),
        Mode::GateTomography => (0..8).map(|k| cs(k as f64 * PI / 4.0)).collect(),
    }
}

/// Per-point seed from the master seed and integer tags.
pub(crate) fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut s = splitmix(master ^ 0x5851_f42d_4c95_7f2d);
    for &t in tags {
        s = splitmix(s ^ splitmix(t));
    }
    s
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grids() {
        let p = default_grid(Mode::Protocol);
        assert_eq!(p.len(), 13);
        assert_eq!(p[6].radians(), PI);
        assert!((p[12].radians() - 11.0 * PI / 6.0).abs() < 1e-12);
        assert!(default_grid(Mode::Reference)[0].is_zero());
        assert_eq!(default_grid(Mode::GateTomography).len(), 8);
    }

    #[test]
    fn validation() {
        let mut c = ScenarioConfig::default();
        assert!(c.validate().is_ok());
        c.noise.herald_error = 1.5;
        assert!(c.validate().is_err());
        let mut c = ScenarioConfig::default();
        c.phi_grid.push(CouplingStrength::new(0.0).unwrap());
        assert!(c.validate().is_err());
        c.mode = Mode::Reference;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn mixed_ensemble_averages_to_identity() {
        let e = EnvState::MaximallyMixed.ensemble().unwrap();
        let mut m = CMatrix::zeros(2, 2);
        for (w, r) in e {
            m += r.matrix() * C64::new(w, 0.0);
        }
        assert!(crate::qmath::linalg::max_abs_diff(&m, DensityMatrix::maximally_mixed(1).matrix()) < 1e-15);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, &[0]), derive_seed(1, &[1]));
        assert_ne!(derive_seed(1, &[0]), derive_seed(2, &[0]));
        assert_eq!(derive_seed(5, &[3, 4]), derive_seed(5, &[3, 4]));
    }
}
