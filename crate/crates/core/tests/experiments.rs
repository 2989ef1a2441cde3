use darkstate::experiments::{
    analytic_channel, analytic_point, channel_tomogram, noisy_gate_choi, residual_population_report,
    run_channel_analysis, run_gate_tomography, run_protocol_sweep, run_reference_sweep, run_sweep, EnvState, Mode,
    NoiseParams, ScenarioConfig,
};
use darkstate::protocol::CouplingStrength;
use darkstate::qmath::{eof_from_concurrence, MubState};
use darkstate::tomography::Tomogram;
use darkstate::Error;
use std::f64::consts::{FRAC_PI_2, PI};

fn cs(p: f64) -> CouplingStrength {
    CouplingStrength::new(p).unwrap()
}

fn config(mode: Mode, grid: &[f64], seed: u64) -> ScenarioConfig {
    let mut c = ScenarioConfig::new(mode);
    c.phi_grid = grid.iter().map(|&p| cs(p)).collect();
    c.bootstrap_samples = 0;
    c.seed = seed;
    c
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[test]
fn protocol_success_at_quarter_turn() {
    // [0.5 sin^2(pi/4) / 18] / [0.5 / 9]
    let a = analytic_point(Mode::Protocol, cs(FRAC_PI_2), MubState::Plus, &EnvState::MaximallyMixed, &NoiseParams::default())
        .unwrap();
    assert!((a.success - 0.25).abs() < 1e-12);

    let mut c = config(Mode::Protocol, &[FRAC_PI_2], 5);
    c.rate = 3e4;
    let r = run_protocol_sweep(&c).unwrap();
    let counted = r.points.iter().map(|p| p.success.value).sum::<f64>() / r.points.len() as f64;
    assert!((counted - 0.25).abs() < 0.01, "{counted}");
}

#[test]
fn anchor_is_exactly_one() {
    let mut c = config(Mode::Protocol, &[FRAC_PI_2, PI], 1);
    c.bootstrap_samples = 20;
    let r = run_protocol_sweep(&c).unwrap();
    for p in r.points.iter().filter(|p| p.phi == PI) {
        assert_eq!(p.success.value, 1.0);
        assert_eq!(p.success.std, 0.0);
    }
    let c = config(Mode::Reference, &[0.0, 1.0], 1);
    let r = run_reference_sweep(&c).unwrap();
    assert!(r.points.iter().filter(|p| p.phi == 0.0).all(|p| p.success.value == 1.0));
}

#[test]
fn reference_at_pi_fully_dephases_superpositions() {
    let c = config(Mode::Reference, &[PI], 3);
    let r = run_reference_sweep(&c).unwrap();
    for p in &r.points {
        let expected = if p.state.is_superposition() { 0.5 } else { 1.0 };
        assert!((p.theory.purity - expected).abs() < 1e-12);
        assert!((p.theory.fidelity - expected).abs() < 1e-12);
        assert!((p.fidelity.value - expected).abs() < 0.1, "{:?} {}", p.state, p.fidelity.value);
    }
}

#[test]
fn reference_success_follows_gate_transmission() {
    for phi in [0.3, 1.0, FRAC_PI_2, 2.5, 4.0] {
        let a = analytic_point(Mode::Reference, cs(phi), MubState::Zero, &EnvState::MaximallyMixed, &NoiseParams::default())
            .unwrap();
        assert!((a.success - 1.0 / (1.0 + phi.sin().abs())).abs() < 1e-12);
    }
}

#[test]
fn analytic_channel_examples() {
    let env = EnvState::MaximallyMixed;
    let ideal = NoiseParams::default();
    for phi in [0.5, FRAC_PI_2, PI, 5.0] {
        let (ef, f) = analytic_channel(Mode::Protocol, cs(phi), &env, &ideal).unwrap();
        assert!((ef - 1.0).abs() < 1e-10 && (f - 1.0).abs() < 1e-10);
    }
    let (ef, f) = analytic_channel(Mode::Reference, cs(PI), &env, &ideal).unwrap();
    assert!(ef.abs() < 1e-10 && (f - 0.5).abs() < 1e-12);
    let (ef, _) = analytic_channel(Mode::Reference, cs(FRAC_PI_2), &env, &ideal).unwrap();
    let h = |x: f64| -x * x.log2() - (1.0 - x) * (1.0 - x).log2();
    assert!((ef - h((1.0 + 0.5f64.sqrt()) / 2.0)).abs() < 1e-10);
    assert!((ef - eof_from_concurrence((PI / 4.0).cos())).abs() < 1e-10);
}

#[test]
fn simulated_channel_analysis_of_full_dephasing() {
    let c = config(Mode::Reference, &[PI], 8);
    let r = run_reference_sweep(&c).unwrap();
    let data: Vec<(MubState, &Tomogram)> = r.points.iter().map(|p| (p.state, &p.tomogram)).collect();
    let t = channel_tomogram(&data).unwrap();
    assert_eq!(t.settings.len(), 36);
    let ch = run_channel_analysis(&[(cs(PI), t)], 50, 4).unwrap();
    assert!(ch[0].entanglement_of_formation.value < 0.05);
    assert!((ch[0].fidelity.value - 0.5).abs() < 0.05);
    assert!(ch[0].fidelity.std > 0.0);
}

#[test]
fn incomplete_channel_data_is_rejected() {
    let mut c = config(Mode::Reference, &[PI], 8);
    c.signal_states = vec![MubState::Zero, MubState::Plus];
    let r = run_reference_sweep(&c).unwrap();
    assert!(r.per_phi[0].channel.is_none());
    let data: Vec<(MubState, &Tomogram)> = r.points.iter().map(|p| (p.state, &p.tomogram)).collect();
    let t = channel_tomogram(&data).unwrap();
    assert!(matches!(run_channel_analysis(&[(cs(PI), t)], 0, 0), Err(Error::IncompleteMeasurements(_))));
}

#[test]
fn residual_population_examples() {
    let r = run_protocol_sweep(&config(Mode::Protocol, &[0.8, PI], 2)).unwrap();
    for (_, e) in residual_population_report(&r) {
        assert!(e.value < 0.02, "{}", e.value);
    }
    assert!(r.per_phi.iter().all(|s| s.theory_mean_p1_env.abs() < 1e-12));

    let r = run_reference_sweep(&config(Mode::Reference, &[1.0, PI], 2)).unwrap();
    for s in &r.per_phi {
        assert!((s.theory_mean_p1_env - 0.5).abs() < 1e-12);
        assert!((s.mean_p1_env.value - 0.5).abs() < 0.05);
    }

    let mut previous = -1.0;
    for eps in [0.0, 0.05, 0.1] {
        let mut c = config(Mode::Protocol, &[PI], 0);
        c.noise.herald_error = eps;
        let theory = run_protocol_sweep(&c).unwrap().per_phi[0].theory_mean_p1_env;
        let measured = median(
            (0..9)
                .map(|seed| {
                    c.seed = seed;
                    run_protocol_sweep(&c).unwrap().per_phi[0].mean_p1_env.value
                })
                .collect(),
        );
        assert!(theory > previous);
        assert!((measured - theory).abs() < 0.02, "eps {eps}: {measured} vs {theory}");
        previous = theory;
    }
}

#[test]
fn ideal_runs_have_perfect_theory() {
    let r = run_sweep(&ScenarioConfig {
        bootstrap_samples: 0,
        ..ScenarioConfig::new(Mode::Protocol)
    })
    .unwrap();
    assert_eq!(r.per_phi.len(), 13);
    for p in &r.points {
        assert!((p.theory.fidelity - 1.0).abs() < 1e-10 && (p.theory.purity - 1.0).abs() < 1e-10);
        assert!(p.theory.p1_env.abs() < 1e-12);
    }
}

#[test]
fn estimates_stay_in_range() {
    let mut c = config(Mode::Protocol, &[0.6, 2.0, PI], 6);
    c.noise = NoiseParams {
        herald_error: 0.1,
        gate_depolarizing: 0.05,
        phase_jitter_std: 0.05,
    };
    c.bootstrap_samples = 20;
    let r = run_protocol_sweep(&c).unwrap();
    for p in &r.points {
        for e in [p.purity, p.fidelity, p.p1_env] {
            assert!((0.0..=1.0).contains(&e.value) && e.std >= 0.0);
        }
        assert!(p.success.value >= 0.0);
    }
    for s in &r.per_phi {
        let ch = s.channel.as_ref().unwrap();
        assert!((0.0..=1.0).contains(&ch.entanglement_of_formation.value));
        assert!((0.0..=1.0).contains(&ch.fidelity.value));
    }
}

#[test]
fn six_state_mixture_agrees_with_direct_mixed_environment() {
    // the simulated path uses the six-state ensemble, the theory uses I/2 directly
    let mut c = config(Mode::Reference, &[FRAC_PI_2], 0);
    c.rate = 3e4;
    let r = run_reference_sweep(&c).unwrap();
    for p in &r.points {
        assert!((p.fidelity.value - p.theory.fidelity).abs() < 0.02);
        assert!((p.p1_env.value - p.theory.p1_env).abs() < 0.02);
    }
}

#[test]
fn plus_environment_scenario() {
    let mut c = config(Mode::Protocol, &[FRAC_PI_2], 0);
    c.env_state = EnvState::Plus;
    let r = run_protocol_sweep(&c).unwrap();
    assert!(r.points.iter().all(|p| (p.theory.fidelity - 1.0).abs() < 1e-10));
}

#[test]
fn tomographic_error_shrinks_with_rate() {
    let mut errors = Vec::new();
    for rate in [300.0, 3e3, 3e4] {
        let e: Vec<f64> = (0..20)
            .map(|seed| {
                let mut c = config(Mode::Reference, &[FRAC_PI_2], seed);
                c.rate = rate;
                c.signal_states = vec![MubState::Plus];
                let r = run_reference_sweep(&c).unwrap();
                (r.points[0].fidelity.value - r.points[0].theory.fidelity).abs()
            })
            .collect();
        errors.push(median(e));
    }
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}

#[test]
fn protocol_grid_rejects_zero() {
    let c = config(Mode::Protocol, &[0.0, 1.0], 0);
    assert!(matches!(run_protocol_sweep(&c), Err(Error::DegenerateCoupling(_))));
    let c = config(Mode::Reference, &[1.0], 0);
    assert!(run_protocol_sweep(&c).is_err());
}

#[test]
fn ideal_gate_tomography_at_high_rate() {
    let mut c = config(Mode::GateTomography, &[FRAC_PI_2], 3);
    c.rate = 3e4;
    let g = run_gate_tomography(&c, true).unwrap();
    assert!(g[0].fidelity.value > 0.999, "{}", g[0].fidelity.value);
    assert!(g[0].purity.value > 0.999, "{}", g[0].purity.value);
    assert!(g[0].optimized_fidelity.value >= g[0].fidelity.value - 1e-9);
}

#[test]
fn depolarized_gate_has_minimal_purity() {
    let noise = NoiseParams {
        gate_depolarizing: 1.0,
        ..NoiseParams::default()
    };
    let chi = noisy_gate_choi(cs(2.0), &noise).unwrap();
    assert!((darkstate::tomography::process_purity(&chi).unwrap() - 1.0 / 64.0).abs() < 1e-12);
}
