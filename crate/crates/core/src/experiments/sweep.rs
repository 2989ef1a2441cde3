use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::pipeline::{anchor, analytic_channel, analytic_point, channel_metrics, output_state, AnalyticPoint};
use super::{derive_seed, Mode, ScenarioConfig, MAX_TRANSMITTANCE};
use crate::error::{Error, Result};
use crate::protocol::CouplingStrength;
use crate::qmath::{MubState, PureState};
use crate::tomography::{
    bootstrap_many, draw_poisson, mle_process, mle_state, BootstrapEstimate, MeasurementSetting, Tomogram,
};

const TAG_COUNTS: u64 = 0;
const TAG_POINT: u64 = 1;
const TAG_SUCCESS: u64 = 2;
const TAG_CHANNEL: u64 = 3;

/// Three complete bases of the traced-out qubit, one second each.
const MARGINAL_DURATION: f64 = 3.0;

#[derive(Clone, Debug, Serialize)]
pub struct StatePoint {
    pub phi: f64,
    pub state: MubState,
    pub purity: BootstrapEstimate,
    pub fidelity: BootstrapEstimate,
    /// Normalised success probability.
    pub success: BootstrapEstimate,
    pub p1_env: BootstrapEstimate,
    pub theory: AnalyticPoint,
    /// The 36-setting signal-environment tomogram.
    #[serde(skip)]
    pub tomogram: Tomogram,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChannelPoint {
    pub phi: f64,
    pub entanglement_of_formation: BootstrapEstimate,
    pub fidelity: BootstrapEstimate,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiSummary {
    pub phi: f64,
    pub mean_p1_env: BootstrapEstimate,
    pub theory_mean_p1_env: f64,
    /// Present when all six signal states were measured.
    pub channel: Option<ChannelPoint>,
    /// Exact `(E_f, F)` of the channel.
    pub theory_channel: (f64, f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioResult {
    pub config: ScenarioConfig,
    pub points: Vec<StatePoint>,
    pub per_phi: Vec<PhiSummary>,
}

impl ScenarioResult {
    pub fn point(&self, phi: f64, state: MubState) -> Option<&StatePoint> {
        self.points
            .iter()
            .find(|p| p.state == state && (p.phi - phi).abs() < 1e-12)
    }
}

pub fn run_protocol_sweep(config: &ScenarioConfig) -> Result<ScenarioResult> {
    if config.mode != Mode::Protocol {
        return Err(Error::InvalidArgument("run_protocol_sweep needs mode = protocol".into()));
    }
    run_sweep(config)
}

pub fn run_reference_sweep(config: &ScenarioConfig) -> Result<ScenarioResult> {
    if config.mode != Mode::Reference {
        return Err(Error::InvalidArgument("run_reference_sweep needs mode = reference".into()));
    }
    run_sweep(config)
}

/// Simulates and analyses every `(phi, signal state)` point of a protocol or
/// reference configuration.
pub fn run_sweep(config: &ScenarioConfig) -> Result<ScenarioResult> {
    config.validate()?;
    if config.mode == Mode::GateTomography {
        return Err(Error::InvalidArgument("use run_gate_tomography for gate tomography".into()));
    }
    let anchor = anchor(config.mode);
    let grid: Vec<CouplingStrength> = config
        .phi_grid
        .iter()
        .map(|&p| if (p.radians() - anchor.radians()).abs() < 1e-12 { anchor } else { p })
        .collect();

    let mut needed = grid.clone();
    if !needed.contains(&anchor) {
        needed.push(anchor);
    }
    let jobs: Vec<(CouplingStrength, MubState)> = needed
        .iter()
        .flat_map(|&p| config.signal_states.iter().map(move |&s| (p, s)))
        .collect();
    let tomograms: Vec<Tomogram> = jobs
        .par_iter()
        .map(|&(p, s)| simulate_point(config, p, s))
        .collect::<Result<_>>()?;
    let lookup = |p: CouplingStrength, s: MubState| -> &Tomogram {
        let i = jobs.iter().position(|&j| j == (p, s)).expect("simulated");
        &tomograms[i]
    };

    let point_jobs: Vec<(CouplingStrength, MubState)> = grid
        .iter()
        .flat_map(|&p| config.signal_states.iter().map(move |&s| (p, s)))
        .collect();
    let points: Vec<StatePoint> = point_jobs
        .par_iter()
        .map(|&(p, s)| analyse_point(config, p, s, lookup(p, s), lookup(anchor, s), p == anchor))
        .collect::<Result<_>>()?;

    let all_six = MubState::ALL.iter().all(|l| config.signal_states.contains(l));
    let per_phi = grid
        .par_iter()
        .map(|&p| {
            let at: Vec<&StatePoint> = points.iter().filter(|x| x.phi == p.radians()).collect();
            let channel = if all_six {
                let data: Vec<(MubState, &Tomogram)> = at.iter().map(|x| (x.state, &x.tomogram)).collect();
                let t = channel_tomogram(&data)?;
                let seed = derive_seed(config.seed, &[TAG_CHANNEL, p.radians().to_bits()]);
                Some(run_channel_analysis(&[(p, t)], config.bootstrap_samples, seed)?.remove(0))
            } else {
                None
            };
            let theory_mean = at.iter().map(|x| x.theory.p1_env).sum::<f64>() / at.len() as f64;
            Ok(PhiSummary {
                phi: p.radians(),
                mean_p1_env: mean_estimate(at.iter().map(|x| &x.p1_env)),
                theory_mean_p1_env: theory_mean,
                channel,
                theory_channel: analytic_channel(config.mode, p, &config.env_state, &config.noise)?,
            })
        })
        .collect::<Result<_>>()?;

    Ok(ScenarioResult {
        config: config.clone(),
        points,
        per_phi,
    })
}

/// The 36 product projections of the signal and environment, one second each.
fn joint_settings() -> Vec<MeasurementSetting> {
    crate::tomography::state_settings(2, 1.0).expect("valid grid")
}

fn simulate_point(config: &ScenarioConfig, phi: CouplingStrength, psi: MubState) -> Result<Tomogram> {
    let settings = joint_settings();
    let vectors: Vec<_> = settings.iter().map(|s| PureState::product(&s.projection)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
        config.seed,
        &[TAG_COUNTS, phi.radians().to_bits(), psi.index() as u64],
    ));
    let mut counts = vec![0u64; settings.len()];
    for (w, rho_e) in config.env_state.ensemble()? {
        let out = output_state(config.mode, phi, psi, &rho_e, &config.noise)?;
        let means = settings.iter().zip(&vectors).map(|(s, v)| {
            let p = v.amplitudes().dotc(&(&out * v.amplitudes())).re.max(0.0);
            config.rate * s.duration * w * p
        });
        for (c, d) in counts.iter_mut().zip(draw_poisson(means, &mut rng)) {
            *c += d;
        }
    }
    Tomogram::new(settings, counts, config.rate / MAX_TRANSMITTANCE)
}

/// Single-qubit tomogram of `qubit` (0 = signal, 1 = environment) obtained by
/// summing the joint counts over all outcomes on the other qubit.
pub(crate) fn marginal(t: &Tomogram, qubit: usize) -> Result<Tomogram> {
    let mut counts = [0u64; 6];
    for (s, &c) in t.settings.iter().zip(&t.counts) {
        counts[s.projection[qubit].index()] += c;
    }
    let settings = MubState::ALL
        .into_iter()
        .map(|l| MeasurementSetting::projection(vec![l], MARGINAL_DURATION))
        .collect::<Result<_>>()?;
    Tomogram::new(settings, counts.to_vec(), t.rate_reference)
}

/// `[purity, fidelity with psi, environment |1> population]`.
fn point_statistic(t: &Tomogram, psi: MubState) -> Result<Vec<f64>> {
    let s = mle_state(&marginal(t, 0)?, 2)?;
    let e = mle_state(&marginal(t, 1)?, 2)?;
    Ok(vec![s.purity(), s.fidelity(&PureState::from_label(psi))?, e.population(1)])
}

fn estimate<F>(t: &Tomogram, stat: F, samples: usize, seed: u64) -> Result<Vec<BootstrapEstimate>>
where
    F: Fn(&Tomogram) -> Result<Vec<f64>> + Sync,
{
    if samples == 0 {
        return Ok(stat(t)?.into_iter().map(BootstrapEstimate::exact).collect());
    }
    bootstrap_many(t, stat, samples, seed)
}

fn analyse_point(
    config: &ScenarioConfig,
    phi: CouplingStrength,
    psi: MubState,
    t: &Tomogram,
    anchor_t: &Tomogram,
    is_anchor: bool,
) -> Result<StatePoint> {
    let tags = [phi.radians().to_bits(), psi.index() as u64];
    let seed = derive_seed(config.seed, &[TAG_POINT, tags[0], tags[1]]);
    let m = estimate(t, |x| point_statistic(x, psi), config.bootstrap_samples, seed)?;

    let success = if is_anchor {
        BootstrapEstimate {
            samples: config.bootstrap_samples,
            ..BootstrapEstimate::exact(1.0)
        }
    } else {
        let n = t.counts.len();
        let joined = t.concat(anchor_t);
        let ratio = move |x: &Tomogram| {
            let (a, b) = x.split_at(n);
            let denom = b.total_counts();
            if denom == 0 {
                return Err(Error::ZeroCounts);
            }
            Ok(vec![a.total_counts() as f64 / denom as f64])
        };
        let seed = derive_seed(config.seed, &[TAG_SUCCESS, tags[0], tags[1]]);
        estimate(&joined, ratio, config.bootstrap_samples, seed)?[0]
    };

    Ok(StatePoint {
        phi: phi.radians(),
        state: psi,
        purity: m[0],
        fidelity: m[1],
        success,
        p1_env: m[2],
        theory: analytic_point(config.mode, phi, psi, &config.env_state, &config.noise)?,
        tomogram: t.clone(),
    })
}

/// Mean of independent estimates; standard deviations add in quadrature.
fn mean_estimate<'a>(items: impl Iterator<Item = &'a BootstrapEstimate>) -> BootstrapEstimate {
    let v: Vec<&BootstrapEstimate> = items.collect();
    let n = v.len() as f64;
    BootstrapEstimate {
        value: v.iter().map(|e| e.value).sum::<f64>() / n,
        mean: v.iter().map(|e| e.mean).sum::<f64>() / n,
        std: v.iter().map(|e| e.std * e.std).sum::<f64>().sqrt() / n,
        samples: v.iter().map(|e| e.samples).min().unwrap_or(0),
    }
}

/// Single-qubit process tomogram of the signal channel: for each input state
/// the signal marginal of its joint tomogram.
pub fn channel_tomogram(data: &[(MubState, &Tomogram)]) -> Result<Tomogram> {
    let mut settings = Vec::new();
    let mut counts = Vec::new();
    let mut rate = None;
    for &(psi, t) in data {
        let m = marginal(t, 0)?;
        for (s, c) in m.settings.into_iter().zip(m.counts) {
            settings.push(MeasurementSetting::new(vec![psi], s.projection, s.duration)?);
            counts.push(c);
        }
        rate = Some(t.rate_reference);
    }
    let rate = rate.ok_or_else(|| Error::IncompleteMeasurements("no input states".into()))?;
    Tomogram::new(settings, counts, rate)
}

/// Reconstructs the signal channel at each coupling strength and reports its
/// entanglement of formation and fidelity with the identity channel.
pub fn run_channel_analysis(
    data: &[(CouplingStrength, Tomogram)],
    samples: usize,
    seed: u64,
) -> Result<Vec<ChannelPoint>> {
    data.iter()
        .enumerate()
        .map(|(i, (phi, t))| {
            let stat = |x: &Tomogram| {
                let chi = mle_process(x, 1)?;
                let (ef, f) = channel_metrics(chi.matrix())?;
                Ok(vec![ef, f])
            };
            let e = estimate(t, stat, samples, derive_seed(seed, &[i as u64]))?;
            Ok(ChannelPoint {
                phi: phi.radians(),
                entanglement_of_formation: e[0],
                fidelity: e[1],
            })
        })
        .collect()
}

/// Mean residual environment population `p1_E` over the signal states, per
/// coupling strength.
pub fn residual_population_report(result: &ScenarioResult) -> Vec<(f64, BootstrapEstimate)> {
    result.per_phi.iter().map(|s| (s.phi, s.mean_p1_env)).collect()
}
