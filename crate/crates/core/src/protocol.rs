//! System–environment controlled-phase coupling and the dark-state heralding
//! protocol.
//!
//! Registers are ordered `(probe, environment)` for the two-qubit heralding
//! step and `(probe, signal, environment)` for the three-qubit gate.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::linalg::{self, CMatrix, C64};
use crate::qmath::{DensityMatrix, MubState, OperatorMatrix, PureState, Tensor};

/// Coupling strength `phi` in radians, range-checked to `[0, 2pi)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct CouplingStrength(f64);

impl TryFrom<f64> for CouplingStrength {
    type Error = Error;

    fn try_from(phi: f64) -> Result<Self> {
        Self::new(phi)
    }
}

impl From<CouplingStrength> for f64 {
    fn from(phi: CouplingStrength) -> f64 {
        phi.0
    }
}

impl CouplingStrength {
    pub fn new(phi: f64) -> Result<Self> {
        if !phi.is_finite() || !(0.0..TAU).contains(&phi) {
            return Err(Error::CouplingOutOfRange(phi));
        }
        Ok(Self(phi))
    }

    /// Wraps any finite angle into `[0, 2pi)`.
    pub fn wrapped(phi: f64) -> Result<Self> {
        if !phi.is_finite() {
            return Err(Error::CouplingOutOfRange(phi));
        }
        let w = phi.rem_euclid(TAU);
        Self::new(if w >= TAU { 0.0 } else { w })
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// Representative in `(-pi, pi]`.
    pub fn signed(self) -> f64 {
        if self.0 > PI {
            self.0 - TAU
        } else {
            self.0
        }
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }
}

/// `U_CP(phi) = diag(1, 1, 1, e^{i phi})`.
pub fn u_cp(phi: CouplingStrength) -> OperatorMatrix {
    OperatorMatrix::diagonal_phases(&[0.0, 0.0, 0.0, phi.radians()]).expect("diagonal phases are unitary")
}

/// `U_CCP(phi)`: identity except `|111> -> e^{i phi}|111>`.
pub fn u_ccp(phi: CouplingStrength) -> OperatorMatrix {
    let mut phases = [0.0; 8];
    phases[7] = phi.radians();
    OperatorMatrix::diagonal_phases(&phases).expect("diagonal phases are unitary")
}

/// `q = p0 + e^{i phi} p1`, the factor multiplying the signal coherence.
pub fn coherence_factor(rho_e: &DensityMatrix, phi: CouplingStrength) -> Result<C64> {
    expect_single_qubit(rho_e)?;
    let p0 = rho_e.population(0);
    let p1 = rho_e.population(1);
    Ok(C64::new(p0, 0.0) + C64::from_polar(p1, phi.radians()))
}

/// `|phi_perp> = (|0> - e^{i phi}|1>)/sqrt(2)`, the heralding projection.
pub fn dark_herald_state(phi: CouplingStrength) -> PureState {
    superposition(C64::from_polar(-1.0, phi.radians()))
}

/// `|phi> = (|0> + e^{i phi}|1>)/sqrt(2)`, the complementary outcome.
pub fn bright_herald_state(phi: CouplingStrength) -> PureState {
    superposition(C64::from_polar(1.0, phi.radians()))
}

fn superposition(rel: C64) -> PureState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    PureState::new(linalg::CVector::from_vec(vec![C64::new(h, 0.0), rel * h])).expect("normalised")
}

/// Result of the probe projection. `post_state` is the renormalised joint
/// `(probe, environment)` state of the reported branch.
#[derive(Clone, Debug)]
pub struct HeraldOutcome {
    pub success: bool,
    pub post_state: DensityMatrix,
    pub probability: f64,
    pub success_probability: f64,
    pub failure_probability: f64,
}

impl HeraldOutcome {
    pub fn environment(&self) -> DensityMatrix {
        self.post_state.partial_trace(&[1]).expect("two-qubit register")
    }
}

/// Unnormalised `(probe, environment)` state after coupling a `|+>` probe
/// through `U_CP(phi)` and projecting the probe onto `outcome`.
pub fn project_probe(rho_e: &DensityMatrix, phi: CouplingStrength, outcome: &PureState) -> Result<CMatrix> {
    expect_single_qubit(rho_e)?;
    let probe = PureState::from_label(MubState::Plus).density();
    let joint = probe.tensor(rho_e).evolve(&u_cp(phi))?;
    let proj = OperatorMatrix::projector(outcome).tensor(&OperatorMatrix::identity(1));
    proj.sandwich(joint.matrix())
}

/// Runs the heralding step by explicit two-qubit simulation.
pub fn herald_dark_state(rho_e: &DensityMatrix, phi: CouplingStrength) -> Result<HeraldOutcome> {
    if phi.is_zero() {
        return Err(Error::DegenerateCoupling(
            "phi = 0 never heralds the dark state".into(),
        ));
    }
    let on = project_probe(rho_e, phi, &dark_herald_state(phi))?;
    let off = project_probe(rho_e, phi, &bright_herald_state(phi))?;
    let ps = linalg::trace(&on).re.max(0.0);
    let pf = linalg::trace(&off).re.max(0.0);
    let total = ps + pf;
    let (ps, pf) = (ps / total, pf / total);
    if ps > 0.0 {
        Ok(HeraldOutcome {
            success: true,
            post_state: DensityMatrix::from_unnormalized(on)?,
            probability: ps,
            success_probability: ps,
            failure_probability: pf,
        })
    } else {
        Ok(HeraldOutcome {
            success: false,
            post_state: DensityMatrix::from_unnormalized(off)?,
            probability: pf,
            success_probability: ps,
            failure_probability: pf,
        })
    }
}

/// Single-shot success probability `p0 sin^2(phi/2)`.
pub fn success_probability(p0: f64, phi: CouplingStrength) -> f64 {
    p0 * (phi.radians() / 2.0).sin().powi(2)
}

/// Closed-form probability of heralding within `n` attempts.
///
/// Without thermalisation a failed attempt leaves the environment biased
/// towards `|1>`; with thermalisation it returns to its initial populations.
pub fn repeat_success_probability(p0: f64, phi: CouplingStrength, n: u32, thermalizing: bool) -> Result<f64> {
    check_probability(p0)?;
    if n == 0 {
        return Err(Error::InvalidArgument("repetition count must be positive".into()));
    }
    let c2 = (phi.radians() / 2.0).cos().powi(2);
    Ok(if thermalizing {
        1.0 - (1.0 - success_probability(p0, phi)).powi(n as i32)
    } else {
        p0 * (1.0 - c2.powi(n as i32))
    })
}

/// Sequential simulation of up to `n` heralding attempts with a fresh `|+>`
/// probe each round. Failure branches are carried forward as unnormalised
/// environment states; with `thermalizing` they are reset to `rho_e`.
pub fn simulate_repeated_heralding(
    rho_e: &DensityMatrix,
    phi: CouplingStrength,
    n: u32,
    thermalizing: bool,
) -> Result<f64> {
    expect_single_qubit(rho_e)?;
    if n == 0 {
        return Err(Error::InvalidArgument("repetition count must be positive".into()));
    }
    let dark = dark_herald_state(phi);
    let bright = bright_herald_state(phi);
    let mut env = rho_e.matrix().clone();
    let mut succeeded = 0.0;
    for _ in 0..n {
        let weight = linalg::trace(&env).re;
        if weight <= 0.0 {
            break;
        }
        let normalized = DensityMatrix::from_unnormalized(env.clone())?;
        let on = project_probe(&normalized, phi, &dark)?;
        let off = project_probe(&normalized, phi, &bright)?;
        succeeded += weight * linalg::trace(&on).re;
        let fail_weight = weight * linalg::trace(&off).re;
        env = if thermalizing {
            rho_e.matrix() * C64::new(fail_weight, 0.0)
        } else {
            linalg::partial_trace_matrix(&off, 2, &[1])? * C64::new(weight, 0.0)
        };
    }
    Ok(succeeded)
}

/// `R' = R cos^2(phi/2)` for the population ratio `R = p1/p0`.
pub fn population_ratio_update(ratio: f64, phi: CouplingStrength) -> Result<f64> {
    if !(ratio >= 0.0) {
        return Err(Error::InvalidArgument(format!("population ratio {ratio} must be non-negative")));
    }
    Ok(ratio * (phi.radians() / 2.0).cos().powi(2))
}

/// Environment state after projecting the probe onto `|+>` (the protocol
/// variant that does not need to know `phi`), renormalised.
pub fn project_probe_plus(rho_e: &DensityMatrix, phi: CouplingStrength) -> Result<DensityMatrix> {
    let joint = project_probe(rho_e, phi, &PureState::from_label(MubState::Plus))?;
    DensityMatrix::from_unnormalized(linalg::partial_trace_matrix(&joint, 2, &[1])?)
}

/// Scales the coherence of a single-qubit state: `<1|rho|0> -> q <1|rho|0>`
/// (and `<0|rho|1>` by `q*`), which is what `U_CP(phi)` with a
/// traced-out environment produces.
pub fn apply_dephasing(rho_s: &DensityMatrix, q: C64) -> Result<DensityMatrix> {
    expect_single_qubit(rho_s)?;
    if q.norm() > 1.0 + 1e-12 {
        return Err(Error::InvalidArgument(format!("|q| = {} exceeds 1", q.norm())));
    }
    let mut m = rho_s.matrix().clone();
    m[(1, 0)] *= q;
    m[(0, 1)] *= q.conj();
    DensityMatrix::new(m)
}

/// Signal state after `U_CP(phi)` with the environment traced out, by
/// explicit two-qubit evolution (`(signal, environment)` ordering).
pub fn couple_and_trace(rho_s: &DensityMatrix, rho_e: &DensityMatrix, phi: CouplingStrength) -> Result<DensityMatrix> {
    expect_single_qubit(rho_s)?;
    expect_single_qubit(rho_e)?;
    rho_s.tensor(rho_e).evolve(&u_cp(phi))?.partial_trace(&[0])
}

fn expect_single_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.qubits() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    Ok(())
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}
