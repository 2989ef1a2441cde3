//! The acceptance suite, runnable from the command line and from tests.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::experiments::{
    analytic_point, default_grid, run_sweep, write_sweep_csvs, EnvState, Mode, NoiseParams, ScenarioConfig,
    ScenarioResult,
};
use crate::optical_gate::{ccp_kraus, open_grid, realize_ccp};
use crate::protocol::{
    herald_dark_state, project_probe_plus, repeat_success_probability, simulate_repeated_heralding,
    CouplingStrength,
};
use crate::qmath::{DensityMatrix, MubState, PureState};

#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {} ({:.2} s of {} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.detail
        )
    }
}

type Check = fn() -> Result<(bool, String)>;

pub const CRITERIA: [(usize, &str, u64, Check); 10] = [
    (1, "dark-state heralding exactness", 1, heralding_exactness),
    (2, "protection closure", 5, protection_closure),
    (3, "success-probability curves", 1, success_curves),
    (4, "gate decomposition", 1, gate_decomposition),
    (5, "channel tomography fidelity", 60, tomography_fidelity),
    (6, "repeat-protocol formulas", 1, repeat_formulas),
    (7, "population-ratio law", 1, population_ratio_law),
    (8, "noise-trend reproduction", 120, noise_trend),
    (9, "bootstrap sanity", 120, bootstrap_sanity),
    (10, "determinism", 10, determinism),
];

/// Runs criterion `id` (1-based). A criterion passes when its check holds and
/// it finishes within its time budget.
pub fn run_criterion(id: usize) -> CriterionReport {
    let (id, title, budget, check) = CRITERIA[id - 1];
    let budget = Duration::from_secs(budget);
    let start = Instant::now();
    let outcome = check();
    let elapsed = start.elapsed();
    let (ok, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    let in_time = elapsed <= budget;
    CriterionReport {
        id,
        title,
        passed: ok && in_time,
        detail: if in_time { detail } else { format!("{detail}; over time budget") },
        elapsed,
        budget,
    }
}

pub fn run_all() -> Vec<CriterionReport> {
    (1..=CRITERIA.len()).map(run_criterion).collect()
}

fn cs(phi: f64) -> Result<CouplingStrength> {
    CouplingStrength::new(phi)
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

fn heralding_exactness() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut dp, mut df) = (0.0f64, 0.0f64);
    for phi in open_grid(32) {
        for _ in 0..8 {
            let p0: f64 = rng.random_range(0.05..1.0);
            let rho = DensityMatrix::diagonal(&[p0, 1.0 - p0])?;
            let h = herald_dark_state(&rho, phi)?;
            let expected = p0 * (phi.radians() / 2.0).sin().powi(2);
            dp = dp.max((h.success_probability - expected).abs());
            df = df.max((h.environment().fidelity(&PureState::basis(1, 0))? - 1.0).abs());
        }
    }
    Ok((dp <= 1e-12 && df <= 1e-10, format!("max |dP_S| = {dp:.1e}, max |1 - F_E| = {df:.1e}")))
}

fn protection_closure() -> Result<(bool, String)> {
    let env = EnvState::MaximallyMixed;
    let ideal = NoiseParams::default();
    let mut dev_p = 0.0f64;
    for phi in default_grid(Mode::Protocol) {
        for l in MubState::ALL {
            let a = analytic_point(Mode::Protocol, phi, l, &env, &ideal)?;
            dev_p = dev_p.max((a.fidelity - 1.0).abs()).max((a.purity - 1.0).abs());
        }
    }
    let mut dev_r = 0.0f64;
    let mut at_pi = f64::NAN;
    for phi in default_grid(Mode::Reference) {
        for l in MubState::ALL {
            let a = analytic_point(Mode::Reference, phi, l, &env, &ideal)?;
            let expected = if l.is_superposition() {
                (1.0 + (phi.radians() / 2.0).cos().powi(2)) / 2.0
            } else {
                1.0
            };
            dev_r = dev_r
                .max((a.fidelity - expected).abs())
                .max((a.purity - expected).abs());
            if l == MubState::Plus && phi.radians() == PI {
                at_pi = a.fidelity;
            }
        }
    }
    let ok = dev_p <= 1e-10 && dev_r <= 1e-10 && (at_pi - 0.5).abs() <= 1e-10;
    Ok((
        ok,
        format!("protocol max dev {dev_p:.1e}, reference max dev {dev_r:.1e}, reference F(+, pi) = {at_pi:.12}"),
    ))
}

fn success_curves() -> Result<(bool, String)> {
    let env = EnvState::MaximallyMixed;
    let ideal = NoiseParams::default();
    let mut dev = [0.0f64; 2];
    for (k, mode) in [Mode::Protocol, Mode::Reference].into_iter().enumerate() {
        for phi in default_grid(mode).into_iter().chain(open_grid(32)) {
            let p = phi.radians();
            let expected = match mode {
                Mode::Protocol => (p / 2.0).sin().powi(2) / (1.0 + p.sin().abs()),
                _ => 1.0 / (1.0 + p.sin().abs()),
            };
            for l in MubState::ALL {
                let a = analytic_point(mode, phi, l, &env, &ideal)?;
                dev[k] = dev[k].max((a.success - expected).abs());
            }
        }
    }
    Ok((
        dev.iter().all(|&d| d <= 1e-12),
        format!("protocol max dev {:.1e}, reference max dev {:.1e}", dev[0], dev[1]),
    ))
}

fn gate_decomposition() -> Result<(bool, String)> {
    let (mut defect, mut dc) = (0.0f64, 0.0f64);
    for k in 1..8 {
        let phi = cs(k as f64 * FRAC_PI_4)?;
        let g = realize_ccp(phi)?;
        defect = defect.max(g.proportionality_defect());
        let expected = 1.0 / (9.0 + 9.0 * phi.radians().sin().abs());
        dc = dc.max((g.success_probability() - expected).abs());
    }
    let near_zero = realize_ccp(cs(1e-9)?)?;
    defect = defect.max(near_zero.proportionality_defect());
    let limit = (near_zero.success_probability() - 1.0 / 9.0).abs();
    let at_zero = (ccp_kraus(cs(0.0)?)?.max_transmission() - 1.0 / 9.0).abs();
    let ok = defect < 1e-9 && dc <= 1e-9 && limit <= 1e-8 && at_zero <= 1e-12;
    Ok((
        ok,
        format!("max defect {defect:.1e}, max ||c|^2 - P_CCP| {dc:.1e}, |c|^2 -> 1/9 within {limit:.1e}"),
    ))
}

fn tomography_fidelity() -> Result<(bool, String)> {
    let phi = FRAC_PI_2;
    // |q| = |1 + e^{i phi}| / 2 for a maximally mixed environment
    let q = (phi / 2.0).cos().abs();
    let h = |x: f64| if x <= 0.0 || x >= 1.0 { 0.0 } else { -x * x.log2() - (1.0 - x) * (1.0 - x).log2() };
    let ef_exact = h((1.0 + (1.0 - q * q).sqrt()) / 2.0);
    let f_exact = (1.0 + (phi / 2.0).cos().powi(2)) / 2.0;

    let mut ef = Vec::new();
    let mut f = Vec::new();
    for seed in 0..20 {
        let mut c = ScenarioConfig::new(Mode::Reference);
        c.phi_grid = vec![cs(phi)?];
        c.rate = 3e4;
        c.bootstrap_samples = 0;
        c.seed = seed;
        let r = run_sweep(&c)?;
        let ch = r.per_phi[0].channel.as_ref().expect("six signal states");
        ef.push(ch.entanglement_of_formation.value);
        f.push(ch.fidelity.value);
    }
    let (ef, f) = (median(ef), median(f));
    let ok = (ef - ef_exact).abs() <= 0.02 && (f - f_exact).abs() <= 0.01;
    Ok((
        ok,
        format!("median E_f = {ef:.4} (exact {ef_exact:.4}), median F = {f:.4} (exact {f_exact:.4})"),
    ))
}

fn repeat_formulas() -> Result<(bool, String)> {
    let mut dev = 0.0f64;
    for p0 in [0.25, 0.5, 0.9] {
        let rho = DensityMatrix::diagonal(&[p0, 1.0 - p0])?;
        for phi in [FRAC_PI_4, FRAC_PI_2, PI] {
            let phi = cs(phi)?;
            for n in 1..=5 {
                for thermalizing in [false, true] {
                    let sim = simulate_repeated_heralding(&rho, phi, n, thermalizing)?;
                    let closed = repeat_success_probability(p0, phi, n, thermalizing)?;
                    dev = dev.max((sim - closed).abs());
                }
            }
        }
    }
    Ok((dev <= 1e-12, format!("max deviation {dev:.1e}")))
}

fn population_ratio_law() -> Result<(bool, String)> {
    let mut dev = 0.0f64;
    for p0 in [0.25, 0.5, 0.9] {
        for phi in [FRAC_PI_4, FRAC_PI_2, 2.0, PI, 5.0] {
            let phi = cs(phi)?;
            let c2 = (phi.radians() / 2.0).cos().powi(2);
            let r0 = (1.0 - p0) / p0;
            let mut rho = DensityMatrix::diagonal(&[p0, 1.0 - p0])?;
            for n in 1..=5 {
                rho = project_probe_plus(&rho, phi)?;
                let r = rho.population(1) / rho.population(0);
                dev = dev.max((r / r0 - c2.powi(n)).abs());
            }
        }
    }
    Ok((dev <= 1e-12, format!("max |R_N/R_0 - cos^2N(phi/2)| = {dev:.1e}")))
}

fn noise_trend() -> Result<(bool, String)> {
    let phis = [FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4, PI];
    let grid: Vec<CouplingStrength> = phis.iter().map(|&p| cs(p)).collect::<Result<_>>()?;
    let noisy = NoiseParams {
        herald_error: 0.05,
        ..NoiseParams::default()
    };
    let mut pop = vec![Vec::new(); phis.len()];
    let mut fp = vec![Vec::new(); phis.len()];
    let mut fr = vec![Vec::new(); phis.len()];
    for seed in 0..20 {
        for mode in [Mode::Protocol, Mode::Reference] {
            let mut c = ScenarioConfig::new(mode);
            c.phi_grid = grid.clone();
            c.noise = noisy;
            c.bootstrap_samples = 0;
            c.seed = seed;
            let r = run_sweep(&c)?;
            for (i, &p) in phis.iter().enumerate() {
                let f = r.point(p, MubState::Plus).expect("point").fidelity.value;
                if mode == Mode::Protocol {
                    pop[i].push(r.per_phi[i].mean_p1_env.value);
                    fp[i].push(f);
                } else {
                    fr[i].push(f);
                }
            }
        }
    }
    let pop: Vec<f64> = pop.into_iter().map(median).collect();
    let fp: Vec<f64> = fp.into_iter().map(median).collect();
    let fr: Vec<f64> = fr.into_iter().map(median).collect();
    let decreasing = pop.windows(2).all(|w| w[1] < w[0]);
    let beats = fp.iter().zip(&fr).all(|(p, r)| p >= r);
    Ok((
        decreasing && beats,
        format!("median p1_E = {pop:.4?}, F(+) protocol {fp:.4?} vs reference {fr:.4?}"),
    ))
}

fn bootstrap_sanity() -> Result<(bool, String)> {
    let std_at = |rate: f64| -> Result<f64> {
        let mut c = ScenarioConfig::new(Mode::Reference);
        c.phi_grid = vec![cs(FRAC_PI_2)?];
        c.signal_states = vec![MubState::Plus];
        c.rate = rate;
        c.bootstrap_samples = 1000;
        c.seed = 9;
        let r = run_sweep(&c)?;
        Ok(r.points[0].fidelity.std)
    };
    let low = std_at(300.0)?;
    let high = std_at(1200.0)?;
    let ratio = low / high;
    let ok = low > 0.0 && high > 0.0 && (1.0..=3.0).contains(&ratio);
    Ok((ok, format!("std {low:.4} at rate 300, {high:.4} at rate 1200, ratio {ratio:.2}")))
}

fn sweep_bytes(result: &ScenarioResult, tag: &str) -> Result<Vec<Vec<u8>>> {
    let dir: PathBuf = std::env::temp_dir().join(format!("darkstate-selftest-{}-{tag}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let files = write_sweep_csvs(result, &dir)?;
    let bytes = files.iter().map(std::fs::read).collect::<std::io::Result<Vec<_>>>()?;
    std::fs::remove_dir_all(&dir)?;
    Ok(bytes)
}

fn determinism() -> Result<(bool, String)> {
    let mut c = ScenarioConfig::new(Mode::Protocol);
    c.phi_grid = vec![cs(FRAC_PI_2)?, cs(PI)?, cs(5.0)?];
    c.noise.herald_error = 0.05;
    c.bootstrap_samples = 50;
    c.seed = 2024;
    let a = sweep_bytes(&run_sweep(&c)?, "a")?;
    let b = sweep_bytes(&run_sweep(&c)?, "b")?;
    let same = a == b;
    Ok((same, format!("{} CSV files, byte-identical: {same}", a.len())))
}
