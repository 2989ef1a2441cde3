//! Linear-optical realisation of the tunable controlled-controlled-phase
//! gate from a fixed coincidence-basis C³Z gate and an auxiliary path qubit.
//!
//! Register order is `(P, S, E, A)`. The first beam displacer copies the
//! probe polarisation `P` into the path qubit `A`, so the two interferometer
//! arms carry `P = |0>` (`A = 0`) and `P = |1>` (`A = 1`). In the `A = 1` arm
//! the polarisation is rotated by `x`, passes the C³Z filter, and is analysed
//! with a phase plate and a rotation by `y`; in the `A = 0` arm the rotation
//! by `z` attenuates the amplitude to `cos z`, which equals the magnitude of
//! the `A = 1` arm. The tilt phase `phi/2` on the path cancels the residual
//! relative phase between the arms, and the second displacer followed by
//! keeping the central output (`A = 0`) maps the arms back onto the probe
//! qubit.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::protocol::{u_ccp, CouplingStrength};
use crate::qmath::linalg::{self, CMatrix, CVector, C64, ONE, ZERO};
use crate::qmath::{Axis, OperatorMatrix};

const P: usize = 0;
const A: usize = 3;
const REGISTER: usize = 4;

/// Wave-plate rotation angles for a requested coupling strength. `y = x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveplateAngles {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Solves `|tan x| = sqrt(cot(|phi|/2))`, `y = x`,
/// `cos z = sqrt(cos^4 x + sin^4 x)` with `|phi|` taken from the
/// representative of `phi` in `(-pi, pi]`.
pub fn solve_angles(phi: CouplingStrength) -> Result<WaveplateAngles> {
    if phi.is_zero() {
        return Err(Error::DegenerateCoupling(
            "wave-plate angles diverge at phi = 0".into(),
        ));
    }
    let half = phi.signed().abs() / 2.0;
    // cot(half) >= 0 on (0, pi/2]
    let cot = (half.cos() / half.sin()).max(0.0);
    let x = cot.sqrt().atan();
    let (c, s) = (x.cos(), x.sin());
    let z = (c.powi(4) + s.powi(4)).sqrt().min(1.0).acos();
    Ok(WaveplateAngles { x, y: x, z })
}

/// Four-qubit coincidence-basis C³Z gate as a Kraus operator:
/// `diag(1/3, ..., 1/3, -1/3)`.
pub fn c3z_filter() -> OperatorMatrix {
    let mut d = vec![C64::new(1.0 / 3.0, 0.0); 16];
    d[15] = C64::new(-1.0 / 3.0, 0.0);
    OperatorMatrix::new(CMatrix::from_diagonal(&CVector::from_vec(d))).expect("16 x 16")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StageKind {
    Unitary,
    /// Appends the auxiliary qubit in `|0>` (an isometry).
    AuxPreparation,
    /// Non-unitary post-selection with `F^dagger F <= I`.
    Filter,
}

#[derive(Clone, Debug)]
pub struct Stage {
    pub name: &'static str,
    pub kind: StageKind,
    pub op: OperatorMatrix,
}

/// The ordered stage list of the gate and the scalar `c` such that the
/// composite equals `c * U_CCP(phi)`.
#[derive(Clone, Debug)]
pub struct GateRealization {
    pub phi: CouplingStrength,
    pub angles: WaveplateAngles,
    pub stages: Vec<Stage>,
    pub success_amplitude: C64,
}

impl GateRealization {
    /// Product of all stages, an `8 x 8` operator on `(P, S, E)`.
    pub fn composite(&self) -> CMatrix {
        compose(&self.stages)
    }

    pub fn success_probability(&self) -> f64 {
        self.success_amplitude.norm_sqr()
    }

    /// `max |C/c - U_CCP(phi)|`.
    pub fn proportionality_defect(&self) -> f64 {
        let scaled = self.composite() / self.success_amplitude;
        linalg::max_abs_diff(&scaled, u_ccp(self.phi).matrix())
    }
}

fn compose(stages: &[Stage]) -> CMatrix {
    let mut it = stages.iter();
    let first = it.next().expect("non-empty circuit").op.matrix().clone();
    it.fold(first, |acc, s| s.op.matrix() * acc)
}

pub fn realize_ccp(phi: CouplingStrength) -> Result<GateRealization> {
    realize_ccp_with(phi, &c3z_filter())
}

/// Same circuit with a caller-supplied four-qubit C³Z stage (for example the
/// unitary `3K`).
pub fn realize_ccp_with(phi: CouplingStrength, c3z: &OperatorMatrix) -> Result<GateRealization> {
    if c3z.in_qubits() != REGISTER || c3z.out_qubits() != REGISTER {
        return Err(Error::DimensionMismatch {
            expected: 16,
            found: c3z.matrix().nrows(),
        });
    }
    let angles = solve_angles(phi)?;
    let signed = phi.signed();
    // phase plate diag(1, -i) for phi in (0, pi], its conjugate otherwise
    let plate = if signed > 0.0 { -FRAC_PI_2 } else { FRAC_PI_2 };

    let x_gate = OperatorMatrix::pauli(Axis::X);
    let displacer = x_gate.controlled(&[(P, true)], &[A], REGISTER)?;
    let arm = |op: OperatorMatrix, a: bool| op.controlled(&[(A, a)], &[P], REGISTER);

    let stages = vec![
        Stage {
            name: "aux preparation |0>_A",
            kind: StageKind::AuxPreparation,
            op: aux_preparation(),
        },
        Stage {
            name: "beam displacer 1 (CNOT P->A)",
            kind: StageKind::Unitary,
            op: displacer.clone(),
        },
        Stage {
            name: "R_y(2x) on P in arm A=1",
            kind: StageKind::Unitary,
            op: arm(OperatorMatrix::rotation(Axis::Y, 2.0 * angles.x), true)?,
        },
        Stage {
            name: "R_y(2z) on P in arm A=0",
            kind: StageKind::Unitary,
            op: arm(OperatorMatrix::rotation(Axis::Y, 2.0 * angles.z), false)?,
        },
        Stage {
            name: "C3Z coincidence filter",
            kind: StageKind::Filter,
            op: c3z.clone(),
        },
        Stage {
            name: "phase plate on P in arm A=1",
            kind: StageKind::Unitary,
            op: arm(OperatorMatrix::diagonal_phases(&[0.0, plate])?, true)?,
        },
        Stage {
            name: "R_y(-2y) on P in arm A=1",
            kind: StageKind::Unitary,
            op: arm(OperatorMatrix::rotation(Axis::Y, -2.0 * angles.y), true)?,
        },
        Stage {
            name: "displacer tilt phase phi/2 on A",
            kind: StageKind::Unitary,
            op: OperatorMatrix::diagonal_phases(&[0.0, signed / 2.0])?.embed(&[A], REGISTER)?,
        },
        Stage {
            name: "beam displacer 2 (CNOT P->A)",
            kind: StageKind::Unitary,
            op: displacer,
        },
        Stage {
            name: "keep central output <0|_A",
            kind: StageKind::Filter,
            op: aux_projection(),
        },
    ];
    let composite = compose(&stages);
    let success_amplitude = composite[(0, 0)];
    Ok(GateRealization {
        phi,
        angles,
        stages,
        success_amplitude,
    })
}

/// `|pse> -> |pse>|0>_A`, a `16 x 8` isometry.
fn aux_preparation() -> OperatorMatrix {
    let zero = CMatrix::from_column_slice(2, 1, &[ONE, ZERO]);
    OperatorMatrix::new(linalg::kron(&CMatrix::identity(8, 8), &zero)).expect("16 x 8")
}

/// `<0|_A`, an `8 x 16` projection.
fn aux_projection() -> OperatorMatrix {
    let zero = CMatrix::from_row_slice(1, 2, &[ONE, ZERO]);
    OperatorMatrix::new(linalg::kron(&CMatrix::identity(8, 8), &zero)).expect("8 x 16")
}

/// `P_CCP = 1 / (9 + 9 |sin phi|)`.
pub fn ccp_success_probability(phi: CouplingStrength) -> f64 {
    1.0 / (9.0 + 9.0 * phi.radians().sin().abs())
}

/// Kraus operator of the ideal post-selected gate, `c * U_CCP(phi)`, with the
/// `phi -> 0` limit `U_CCP(0) / 3` where the angle solver is singular.
pub fn ccp_kraus(phi: CouplingStrength) -> Result<OperatorMatrix> {
    if phi.is_zero() {
        return Ok(OperatorMatrix::identity(3).scale(C64::new(1.0 / 3.0, 0.0)));
    }
    let g = realize_ccp(phi)?;
    OperatorMatrix::new(g.composite())
}

/// Grid of `count` coupling strengths strictly inside `(0, 2pi)`.
pub fn open_grid(count: usize) -> Vec<CouplingStrength> {
    (1..=count)
        .map(|k| CouplingStrength::new(2.0 * PI * k as f64 / (count + 1) as f64).expect("in range"))
        .collect()
}
