mod common;

use common::{close, density};
use darkstate::protocol::{
    apply_dephasing, coherence_factor, couple_and_trace, herald_dark_state, population_ratio_update,
    project_probe_plus, repeat_success_probability, simulate_repeated_heralding, u_ccp, u_cp, CouplingStrength,
};
use darkstate::qmath::{DensityMatrix, PureState};
use proptest::prelude::*;

fn coupling() -> impl Strategy<Value = CouplingStrength> {
    (1e-3f64..std::f64::consts::TAU - 1e-3).prop_map(|p| CouplingStrength::new(p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dephasing_equals_coupling_with_traced_environment(rho_s in density(1), rho_e in density(1), phi in coupling()) {
        let q = coherence_factor(&rho_e, phi).unwrap();
        prop_assert!(q.norm() <= 1.0 + 1e-12);
        let a = apply_dephasing(&rho_s, q).unwrap();
        let b = couple_and_trace(&rho_s, &rho_e, phi).unwrap();
        prop_assert!(close(a.matrix(), b.matrix(), 1e-13));
    }

    #[test]
    fn heralding_prepares_the_dark_state(p0 in 0.01f64..1.0, phi in coupling()) {
        let rho = DensityMatrix::diagonal(&[p0, 1.0 - p0]).unwrap();
        let h = herald_dark_state(&rho, phi).unwrap();
        let expected = p0 * (phi.radians() / 2.0).sin().powi(2);
        prop_assert!((h.success_probability - expected).abs() < 1e-12);
        prop_assert!((h.success_probability + h.failure_probability - 1.0).abs() < 1e-12);
        prop_assert!((h.environment().fidelity(&PureState::basis(1, 0)).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn plus_projection_follows_ratio_law(p0 in 0.05f64..0.95, phi in coupling()) {
        let rho = DensityMatrix::diagonal(&[p0, 1.0 - p0]).unwrap();
        let after = project_probe_plus(&rho, phi).unwrap();
        let r = after.population(1) / after.population(0);
        let expected = population_ratio_update((1.0 - p0) / p0, phi).unwrap();
        prop_assert!((r - expected).abs() < 1e-12 * (1.0 + expected));
    }

    #[test]
    fn sequential_heralding_matches_closed_forms(p0 in 0.0f64..=1.0, phi in coupling(), n in 1u32..8, th in any::<bool>()) {
        let rho = DensityMatrix::diagonal(&[p0, 1.0 - p0]).unwrap();
        let sim = simulate_repeated_heralding(&rho, phi, n, th).unwrap();
        let closed = repeat_success_probability(p0, phi, n, th).unwrap();
        prop_assert!((sim - closed).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&sim));
    }

    #[test]
    fn ccp_reduces_to_cp_when_signal_is_one(phi in coupling()) {
        let u = u_ccp(phi);
        let cp = u_cp(phi);
        // rows/columns with S = 1 in (P, S, E) ordering
        for (i, a) in [2usize, 3, 6, 7].into_iter().enumerate() {
            for (j, b) in [2usize, 3, 6, 7].into_iter().enumerate() {
                prop_assert!((u.matrix()[(a, b)] - cp.matrix()[(i, j)]).norm() < 1e-15);
            }
        }
    }
}
