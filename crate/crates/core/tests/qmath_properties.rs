mod common;

use common::{close, density, pure_state, unitary_1q};
use darkstate::protocol::{apply_dephasing, coherence_factor, u_cp, CouplingStrength};
use darkstate::qmath::linalg::{hermitian_eigenvalues, von_neumann_entropy};
use darkstate::qmath::{
    concurrence, entanglement_of_formation, CMatrix, DensityMatrix, MubState, OperatorMatrix, PureState, Tensor,
    C64,
};
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_is_associative(a in density(1), b in density(1), c in density(1)) {
        let left = a.tensor(&b).tensor(&c);
        let right = a.tensor(&b.tensor(&c));
        prop_assert!(close(left.matrix(), right.matrix(), 1e-14));
    }

    #[test]
    fn partial_trace_of_product_returns_factor(a in density(1), b in density(2)) {
        let ab = a.tensor(&b);
        prop_assert!(close(ab.partial_trace(&[0]).unwrap().matrix(), a.matrix(), 1e-13));
        prop_assert!(close(ab.partial_trace(&[1, 2]).unwrap().matrix(), b.matrix(), 1e-13));
    }

    #[test]
    fn purity_is_sum_of_squared_eigenvalues(rho in density(2)) {
        let from_spectrum: f64 = hermitian_eigenvalues(rho.matrix()).iter().map(|l| l * l).sum();
        let p = rho.purity();
        prop_assert!((p - from_spectrum).abs() < 1e-12);
        prop_assert!((0.25 - 1e-12..=1.0).contains(&p));
    }

    #[test]
    fn pure_state_formation_equals_marginal_entropy(psi in pure_state(2)) {
        let rho = psi.density();
        let marginal = rho.partial_trace(&[0]).unwrap();
        let s = von_neumann_entropy(marginal.matrix());
        prop_assert!((entanglement_of_formation(&rho).unwrap() - s).abs() < 1e-7);
    }

    #[test]
    fn local_unitaries_preserve_metrics(rho in density(2), u in unitary_1q(), v in unitary_1q(), psi in pure_state(2)) {
        let uv = u.tensor(&v);
        let rotated = rho.evolve(&uv).unwrap();
        let psi_rotated = PureState::new(uv.apply(&psi).unwrap()).unwrap();
        prop_assert!((rotated.purity() - rho.purity()).abs() < 1e-12);
        prop_assert!((rotated.fidelity(&psi_rotated).unwrap() - rho.fidelity(&psi).unwrap()).abs() < 1e-12);
        prop_assert!((concurrence(&rotated).unwrap() - concurrence(&rho).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn fidelity_is_a_probability(rho in density(1), psi in pure_state(1)) {
        let f = rho.fidelity(&psi).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
    }
}

fn dephased_plus(phi: f64) -> DensityMatrix {
    let phi = CouplingStrength::new(phi).unwrap();
    let q = coherence_factor(&DensityMatrix::maximally_mixed(1), phi).unwrap();
    apply_dephasing(&PureState::from_label(MubState::Plus).density(), q).unwrap()
}

#[test]
fn dephased_plus_at_quarter_turn() {
    // |q| = cos(pi/4): F = (1 + Re q)/2, P = (1 + |q|^2)/2
    let rho = dephased_plus(FRAC_PI_2);
    assert!((rho.fidelity(&PureState::from_label(MubState::Plus)).unwrap() - 0.75).abs() < 1e-12);
    assert!((rho.purity() - 0.75).abs() < 1e-12);
}

#[test]
fn coupling_at_pi_kills_coherence() {
    let phi = CouplingStrength::new(PI).unwrap();
    let joint = PureState::from_label(MubState::Plus)
        .density()
        .tensor(&DensityMatrix::maximally_mixed(1))
        .evolve(&u_cp(phi))
        .unwrap();
    let s = joint.partial_trace(&[0]).unwrap();
    assert!(close(s.matrix(), DensityMatrix::maximally_mixed(1).matrix(), 1e-15));
}

#[test]
fn bell_state_dephased_on_one_arm() {
    // explicit 4 x 4 Choi of dephasing with factor q on the second qubit
    let q = C64::from_polar((PI / 4.0).cos(), 0.7);
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = C64::new(0.5, 0.0);
    m[(3, 3)] = C64::new(0.5, 0.0);
    m[(3, 0)] = q * 0.5;
    m[(0, 3)] = q.conj() * 0.5;
    let rho = DensityMatrix::new(m).unwrap();
    assert!((concurrence(&rho).unwrap() - (PI / 4.0).cos()).abs() < 1e-10);
}

#[test]
fn product_states_are_separable() {
    let rho = PureState::product(&[MubState::Plus, MubState::MinusI]).density();
    assert!(concurrence(&rho).unwrap() < 1e-10);
    assert!(entanglement_of_formation(&rho).unwrap() < 1e-10);
    let bell = PureState::maximally_entangled(1).density();
    assert!((entanglement_of_formation(&bell).unwrap() - 1.0).abs() < 1e-12);
    let id = OperatorMatrix::identity(2);
    assert!(close(bell.evolve(&id).unwrap().matrix(), bell.matrix(), 0.0));
}
