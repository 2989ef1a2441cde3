#![allow(dead_code)]

use darkstate::qmath::{CMatrix, CVector, DensityMatrix, OperatorMatrix, PureState, C64};
use proptest::prelude::*;

pub fn pure_state(qubits: usize) -> impl Strategy<Value = PureState> {
    let d = 1usize << qubits;
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d)
        .prop_filter("non-zero", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3)
        .prop_map(|v| {
            PureState::normalized(CVector::from_iterator(v.len(), v.into_iter().map(|(a, b)| C64::new(a, b))))
                .expect("normalisable")
        })
}

/// Random state of rank up to `dim` as a weighted mixture of pure states.
pub fn density(qubits: usize) -> impl Strategy<Value = DensityMatrix> {
    let d = 1usize << qubits;
    prop::collection::vec((pure_state(qubits), 0.01f64..1.0), 1..=d).prop_map(move |parts| {
        let total: f64 = parts.iter().map(|p| p.1).sum();
        let mut m = CMatrix::zeros(d, d);
        for (psi, w) in parts {
            m += psi.density().matrix() * C64::new(w / total, 0.0);
        }
        DensityMatrix::new((&m + m.adjoint()) * C64::new(0.5, 0.0)).expect("valid state")
    })
}

/// Random single-qubit unitary from Euler angles.
pub fn unitary_1q() -> impl Strategy<Value = OperatorMatrix> {
    (0.0f64..6.3, 0.0f64..6.3, 0.0f64..6.3).prop_map(|(a, b, c)| {
        use darkstate::qmath::Axis;
        OperatorMatrix::rotation(Axis::Z, a)
            .compose(&OperatorMatrix::rotation(Axis::Y, b))
            .and_then(|u| u.compose(&OperatorMatrix::rotation(Axis::Z, c)))
            .expect("2 x 2")
    })
}

pub fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    darkstate::qmath::linalg::max_abs_diff(a, b) <= tol
}
