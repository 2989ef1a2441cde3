//! Command-line front end: configuration parsing, dispatch and artifact
//! writing.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::experiments::{
    default_grid, run_gate_tomography, run_sweep, write_channel_csv, write_gate_csv, write_manifest,
    write_sweep_csvs, EnvState, GatePoint, Mode, ScenarioConfig, ScenarioResult,
};
use crate::protocol::CouplingStrength;
use crate::qmath::MubState;
use crate::selftest;

/// Keys accepted in configuration files and `--set` overrides.
pub const CONFIG_KEYS: [&str; 10] = [
    "mode",
    "phi_grid",
    "env_state",
    "signal_states",
    "rate",
    "seed",
    "bootstrap_samples",
    "noise.herald_error",
    "noise.gate_depolarizing",
    "noise.phase_jitter_std",
];

#[derive(Debug, Parser)]
#[command(name = "darkstate", version, about = "Dark-state decoherence suppression simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Heralded protocol sweep (purity, fidelity, success, populations, channel).
    Protocol(RunArgs),
    /// Unprotected reference sweep.
    Reference(RunArgs),
    /// Channel tomography only (mode taken from the config, default protocol).
    Channel(RunArgs),
    /// Three-qubit process tomography of the CCP gate.
    GateTomo(RunArgs),
    /// Runs the acceptance suite.
    Selftest,
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// Configuration file (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a configuration key, e.g. `noise.herald_error=0.05`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Acknowledge the cost of 6^6-setting gate tomography.
    #[arg(long)]
    pub full_3q_tomo: bool,
    /// Bootstrap replicas (0 disables resampling).
    #[arg(long)]
    pub bootstrap: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Number {
    Int(i64),
    Float(f64),
}

impl Number {
    fn get(&self) -> f64 {
        match *self {
            Number::Int(i) => i as f64,
            Number::Float(f) => f,
        }
    }
}

/// A coupling strength given as a number or as text such as `pi/2`,
/// `3pi/4` or `0.25*pi`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Angle {
    Num(Number),
    Text(String),
}

impl Angle {
    fn radians(&self) -> std::result::Result<f64, String> {
        match self {
            Angle::Num(n) => Ok(n.get()),
            Angle::Text(s) => parse_angle(s),
        }
    }
}

fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot read angle `{s}`");
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a, b.parse::<f64>().map_err(|_| bad())?),
        None => (t.as_str(), 1.0),
    };
    let value = match num.strip_suffix("pi") {
        Some(k) => {
            let k = k.strip_suffix('*').unwrap_or(k);
            let k = if k.is_empty() { 1.0 } else { k.parse::<f64>().map_err(|_| bad())? };
            k * std::f64::consts::PI
        }
        None => num.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(value / den)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    herald_error: Option<Number>,
    gate_depolarizing: Option<Number>,
    phase_jitter_std: Option<Number>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Option<Mode>,
    phi_grid: Option<Vec<Angle>>,
    env_state: Option<EnvState>,
    signal_states: Option<Vec<MubState>>,
    rate: Option<Number>,
    noise: Option<RawNoise>,
    seed: Option<u64>,
    bootstrap_samples: Option<u64>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line on which `key` (dotted for nested fields) is assigned, if any.
fn key_line(text: &str, key: &str) -> Option<usize> {
    let mut section = String::new();
    let mut parent_line = None;
    let top = key.split('.').next().unwrap_or(key);
    for (i, line) in text.lines().enumerate() {
        let l = line.trim();
        if let Some(h) = l.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
            section = h.trim().to_string();
            if section == top || key.starts_with(&format!("{section}.")) {
                parent_line.get_or_insert(i + 1);
            }
            continue;
        }
        let Some((k, _)) = l.split_once('=') else { continue };
        let k = k.trim().trim_matches('"');
        let full = if section.is_empty() { k.to_string() } else { format!("{section}.{k}") };
        if full == key {
            return Some(i + 1);
        }
        if full == top {
            parent_line.get_or_insert(i + 1);
        }
    }
    parent_line
}

fn config_error(line: Option<usize>, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn override_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()))
}

/// Applies `KEY=VALUE` overrides to a parsed table.
fn apply_overrides(table: &mut toml::Table, overrides: &[String]) -> Result<BTreeSet<String>> {
    let mut keys = BTreeSet::new();
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| config_error(None, format!("override `{o}` is not KEY=VALUE")))?;
        let k = k.trim();
        if !CONFIG_KEYS.contains(&k) {
            return Err(config_error(None, format!("override `{o}`: unknown key `{k}`")));
        }
        let value = override_value(v);
        match k.split_once('.') {
            Some((outer, inner)) => {
                let entry = table
                    .entry(outer.to_string())
                    .or_insert_with(|| toml::Value::Table(toml::Table::new()));
                let t = entry
                    .as_table_mut()
                    .ok_or_else(|| config_error(None, format!("`{outer}` is not a table")))?;
                t.insert(inner.to_string(), value);
            }
            None => {
                table.insert(k.to_string(), value);
            }
        }
        keys.insert(k.to_string());
    }
    Ok(keys)
}

/// Parses configuration text for `mode`. Absent keys take their defaults;
/// unknown keys, malformed values and out-of-range values are reported with
/// the line they occur on.
pub fn parse_config_str(text: &str, mode: Mode, overrides: &[String]) -> Result<ScenarioConfig> {
    toml::from_str::<RawConfig>(text).map_err(|e| {
        config_error(e.span().map(|s| line_of(text, s.start)), e.message().to_string())
    })?;
    let mut table: toml::Table = toml::from_str(text).map_err(|e| config_error(None, e.message().to_string()))?;
    let overridden = apply_overrides(&mut table, overrides)?;
    let raw: RawConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| config_error(None, format!("in --set overrides: {}", e.message())))?;

    let locate = |key: &str| {
        if overridden.contains(key) {
            None
        } else {
            key_line(text, key)
        }
    };

    if let Some(m) = raw.mode {
        if m != mode {
            return Err(config_error(
                locate("mode"),
                format!("config mode {m:?} does not match the command ({mode:?})"),
            ));
        }
    }
    let mut config = ScenarioConfig::new(mode);
    if let Some(grid) = raw.phi_grid {
        config.phi_grid = grid
            .iter()
            .map(|a| {
                let phi = a.radians()?;
                CouplingStrength::new(phi).map_err(|e| e.to_string())
            })
            .collect::<std::result::Result<_, String>>()
            .map_err(|m| config_error(locate("phi_grid"), m))?;
    } else {
        config.phi_grid = default_grid(mode);
    }
    if let Some(e) = raw.env_state {
        config.env_state = e;
    }
    if let Some(s) = raw.signal_states {
        config.signal_states = s;
    }
    if let Some(r) = raw.rate {
        config.rate = r.get();
    }
    if let Some(n) = raw.noise {
        if let Some(v) = n.herald_error {
            config.noise.herald_error = v.get();
        }
        if let Some(v) = n.gate_depolarizing {
            config.noise.gate_depolarizing = v.get();
        }
        if let Some(v) = n.phase_jitter_std {
            config.noise.phase_jitter_std = v.get();
        }
    }
    if let Some(s) = raw.seed {
        config.seed = s;
    }
    if let Some(b) = raw.bootstrap_samples {
        config.bootstrap_samples = b as usize;
    }
    config
        .check()
        .map_err(|(key, e)| config_error(locate(&key), e.to_string()))?;
    Ok(config)
}

/// Reads and parses a configuration file.
pub fn parse_config(path: &Path, mode: Mode, overrides: &[String]) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| config_error(None, format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text, mode, overrides)
}

fn load(args: &RunArgs, mode: Mode) -> Result<ScenarioConfig> {
    let mut overrides = args.overrides.clone();
    if let Some(s) = args.seed {
        overrides.push(format!("seed={s}"));
    }
    if let Some(b) = args.bootstrap {
        overrides.push(format!("bootstrap_samples={b}"));
    }
    match &args.config {
        Some(p) => parse_config(p, mode, &overrides),
        None => parse_config_str("", mode, &overrides),
    }
}

/// Mode named by the `mode` key of a channel configuration (protocol if
/// absent).
fn channel_mode(args: &RunArgs) -> Result<Mode> {
    let text = match &args.config {
        Some(p) => fs::read_to_string(p)
            .map_err(|e| config_error(None, format!("cannot read {}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut table: toml::Table =
        toml::from_str(&text).map_err(|e| config_error(e.span().map(|s| line_of(&text, s.start)), e.message()))?;
    apply_overrides(&mut table, &args.overrides)?;
    match table.get("mode") {
        None => Ok(Mode::Protocol),
        Some(v) => {
            let m: Mode = v
                .clone()
                .try_into()
                .map_err(|e: toml::de::Error| config_error(key_line(&text, "mode"), e.message().to_string()))?;
            if m == Mode::GateTomography {
                return Err(config_error(key_line(&text, "mode"), "channel analysis needs protocol or reference mode"));
            }
            Ok(m)
        }
    }
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Output {
        path: dir.display().to_string(),
        source: e,
    })
}

fn sweep_summary(result: &ScenarioResult) -> Vec<String> {
    result
        .per_phi
        .iter()
        .map(|s| {
            let at: Vec<_> = result.points.iter().filter(|p| p.phi == s.phi).collect();
            let n = at.len() as f64;
            let mean = |f: &dyn Fn(&crate::experiments::StatePoint) -> f64| at.iter().map(|p| f(p)).sum::<f64>() / n;
            let mut line = format!(
                "phi={:.4} purity={:.4} fidelity={:.4} success={:.4} p1_env={:.4}",
                s.phi,
                mean(&|p| p.purity.value),
                mean(&|p| p.fidelity.value),
                mean(&|p| p.success.value),
                s.mean_p1_env.value,
            );
            if let Some(c) = &s.channel {
                line += &format!(" E_f={:.4} F={:.4}", c.entanglement_of_formation.value, c.fidelity.value);
            }
            line
        })
        .collect()
}

fn gate_summary(points: &[GatePoint]) -> Vec<String> {
    points
        .iter()
        .map(|g| {
            format!(
                "phi={:.4} F_CCP={:.4} P_CCP={:.4} F_CCP_opt={:.4}",
                g.phi, g.fidelity.value, g.purity.value, g.optimized_fidelity.value
            )
        })
        .collect()
}

/// Runs a parsed invocation, printing one summary line per coupling
/// strength.
pub fn run(cli: Cli) -> Result<()> {
    let (name, args, mode) = match &cli.command {
        Command::Selftest => {
            let reports = selftest::run_all();
            for r in &reports {
                println!("{r}");
            }
            let failed = reports.iter().filter(|r| !r.passed).count();
            return if failed == 0 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{failed} acceptance criteria failed")))
            };
        }
        Command::Protocol(a) => ("protocol", a, Mode::Protocol),
        Command::Reference(a) => ("reference", a, Mode::Reference),
        Command::GateTomo(a) => ("gate-tomo", a, Mode::GateTomography),
        Command::Channel(a) => ("channel", a, channel_mode(a)?),
    };
    let config = load(args, mode)?;
    if name == "channel" && !MubState::ALL.iter().all(|l| config.signal_states.contains(l)) {
        return Err(config_error(None, "channel analysis needs all six signal states"));
    }
    prepare_out(&args.out)?;

    let (lines, mut outputs) = if mode == Mode::GateTomography {
        let points = run_gate_tomography(&config, args.full_3q_tomo)?;
        (gate_summary(&points), vec![write_gate_csv(&points, &args.out)?])
    } else {
        let result = run_sweep(&config)?;
        let outputs = if name == "channel" {
            vec![write_channel_csv(&result, &args.out)?]
        } else {
            write_sweep_csvs(&result, &args.out)?
        };
        (sweep_summary(&result), outputs)
    };
    for l in lines {
        println!("{l}");
    }
    outputs.push(write_manifest(&args.out, name, &config, &outputs)?);
    Ok(())
}

/// Exit status for an error: 2 for configuration problems, 3 for
/// unwritable outputs, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } => 2,
        Error::Output { .. } => 3,
        _ => 1,
    }
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn empty_config_gives_defaults() {
        let c = parse_config_str("", Mode::Protocol, &[]).unwrap();
        assert_eq!(c, ScenarioConfig::new(Mode::Protocol));
        assert_eq!(c.rate, 300.0);
        assert_eq!(c.bootstrap_samples, 1000);
        assert_eq!(c.signal_states.len(), 6);
        assert_eq!(c.env_state, EnvState::MaximallyMixed);
    }

    #[test]
    fn out_of_range_is_reported_with_line() {
        let text = "rate = 300\n\n[noise]\nherald_error = 1.5\n";
        match parse_config_str(text, Mode::Protocol, &[]) {
            Err(Error::Config { line, message }) => {
                assert_eq!(line, Some(4));
                assert!(message.contains("herald_error"));
            }
            other => panic!("{other:?}"),
        }
        let text = "seed = 1\nnoise.herald_error = 1.5\n";
        assert!(matches!(
            parse_config_str(text, Mode::Protocol, &[]),
            Err(Error::Config { line: Some(2), .. })
        ));
    }

    #[test]
    fn unknown_key_is_rejected_with_line() {
        let text = "rate = 300\ncolour = 1\n";
        match parse_config_str(text, Mode::Protocol, &[]) {
            Err(Error::Config { line, message }) => {
                assert_eq!(line, Some(2));
                assert!(message.contains("colour"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_syntax_is_rejected() {
        assert!(matches!(
            parse_config_str("rate = = 3\n", Mode::Protocol, &[]),
            Err(Error::Config { line: Some(1), .. })
        ));
    }

    #[test]
    fn env_state_and_angles() {
        let text = "env_state = \"plus\"\nphi_grid = [\"pi/2\", \"3pi/4\", 3.0, 1]\nsignal_states = [\"+\", \"-i\"]\n";
        let c = parse_config_str(text, Mode::Reference, &[]).unwrap();
        assert_eq!(c.env_state, EnvState::Plus);
        let g: Vec<f64> = c.phi_grid.iter().map(|p| p.radians()).collect();
        assert_eq!(g, vec![PI / 2.0, 3.0 * PI / 4.0, 3.0, 1.0]);
        assert_eq!(c.signal_states, vec![MubState::Plus, MubState::MinusI]);
    }

    #[test]
    fn custom_environment() {
        let text = "[env_state.custom]\nre = [[0.75, 0.0], [0.0, 0.25]]\nim = [[0.0, 0.0], [0.0, 0.0]]\n";
        let c = parse_config_str(text, Mode::Protocol, &[]).unwrap();
        assert!((c.env_state.density().unwrap().population(1) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn overrides_apply_and_are_checked() {
        let c = parse_config_str(
            "",
            Mode::Protocol,
            &["noise.herald_error=0.05".into(), "env_state=plus".into(), "seed=7".into()],
        )
        .unwrap();
        assert_eq!(c.noise.herald_error, 0.05);
        assert_eq!(c.env_state, EnvState::Plus);
        assert_eq!(c.seed, 7);
        assert!(matches!(
            parse_config_str("", Mode::Protocol, &["nope=1".into()]),
            Err(Error::Config { .. })
        ));
        assert!(matches!(
            parse_config_str("[noise]\nherald_error = 0.1\n", Mode::Protocol, &["noise.herald_error=2".into()]),
            Err(Error::Config { line: None, .. })
        ));
    }

    #[test]
    fn protocol_grid_excludes_zero() {
        assert!(matches!(
            parse_config_str("phi_grid = [0.0, 1.0]\n", Mode::Protocol, &[]),
            Err(Error::Config { line: Some(1), .. })
        ));
        assert!(parse_config_str("phi_grid = [0.0, 1.0]\n", Mode::Reference, &[]).is_ok());
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        assert!(matches!(
            parse_config_str("mode = \"reference\"\n", Mode::Protocol, &[]),
            Err(Error::Config { line: Some(1), .. })
        ));
    }

    #[test]
    fn angle_text() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("2*pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert!(parse_angle("tau").is_err());
    }
}
