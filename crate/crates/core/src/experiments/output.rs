//! CSV and JSON artifacts. Every file is written to a temporary sibling and
//! renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{ChannelPoint, GatePoint, ScenarioConfig, ScenarioResult};
use crate::error::{Error, Result};
use crate::tomography::BootstrapEstimate;

pub const CSV_HEADER: &str = "phi,state_label,metric,value,std";

pub const FIG3: &str = "fig3_purity_fidelity_success.csv";
pub const FIG4: &str = "fig4_population.csv";
pub const FIG5: &str = "fig5_channel.csv";
pub const FIG7: &str = "fig7_gate.csv";
pub const MANIFEST: &str = "manifest.json";

/// Writes `bytes` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let fail = |e: std::io::Error| Error::Output {
        path: path.display().to_string(),
        source: e,
    };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| fail(std::io::ErrorKind::InvalidInput.into()))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(fail)?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        fail(e)
    })?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        fail(e)
    })
}

struct Csv(String);

impl Csv {
    fn new() -> Self {
        Self(format!("{CSV_HEADER}\n"))
    }

    fn row(&mut self, phi: f64, label: &str, metric: &str, value: f64, std: f64) {
        writeln!(self.0, "{phi},{label},{metric},{value},{std}").expect("string write");
    }

    fn estimate(&mut self, phi: f64, label: &str, metric: &str, e: &BootstrapEstimate) {
        self.row(phi, label, metric, e.value, e.std);
    }
}

fn fig3(result: &ScenarioResult) -> String {
    let mut c = Csv::new();
    for p in &result.points {
        let l = p.state.as_str();
        c.estimate(p.phi, l, "purity", &p.purity);
        c.estimate(p.phi, l, "fidelity", &p.fidelity);
        c.estimate(p.phi, l, "success_probability", &p.success);
        c.row(p.phi, l, "purity_theory", p.theory.purity, 0.0);
        c.row(p.phi, l, "fidelity_theory", p.theory.fidelity, 0.0);
        c.row(p.phi, l, "success_probability_theory", p.theory.success, 0.0);
    }
    c.0
}

fn fig4(result: &ScenarioResult) -> String {
    let mut c = Csv::new();
    for s in &result.per_phi {
        for p in result.points.iter().filter(|p| p.phi == s.phi) {
            c.estimate(p.phi, p.state.as_str(), "p1_env", &p.p1_env);
        }
        c.estimate(s.phi, "mean", "mean_p1_env", &s.mean_p1_env);
        c.row(s.phi, "mean", "mean_p1_env_theory", s.theory_mean_p1_env, 0.0);
    }
    c.0
}

fn fig5(result: &ScenarioResult) -> String {
    let mut c = Csv::new();
    for s in &result.per_phi {
        if let Some(ch) = &s.channel {
            channel_rows(&mut c, ch);
        }
        c.row(s.phi, "channel", "entanglement_of_formation_theory", s.theory_channel.0, 0.0);
        c.row(s.phi, "channel", "fidelity_theory", s.theory_channel.1, 0.0);
    }
    c.0
}

fn channel_rows(c: &mut Csv, ch: &ChannelPoint) {
    c.estimate(ch.phi, "channel", "entanglement_of_formation", &ch.entanglement_of_formation);
    c.estimate(ch.phi, "channel", "fidelity", &ch.fidelity);
}

/// Writes the figure 3, 4 and 5 tables; returns the paths written.
pub fn write_sweep_csvs(result: &ScenarioResult, dir: &Path) -> Result<Vec<PathBuf>> {
    let files = [(FIG3, fig3(result)), (FIG4, fig4(result)), (FIG5, fig5(result))];
    files
        .into_iter()
        .map(|(name, body)| {
            let p = dir.join(name);
            write_atomic(&p, body.as_bytes())?;
            Ok(p)
        })
        .collect()
}

pub fn write_channel_csv(result: &ScenarioResult, dir: &Path) -> Result<PathBuf> {
    let p = dir.join(FIG5);
    write_atomic(&p, fig5(result).as_bytes())?;
    Ok(p)
}

pub fn write_gate_csv(points: &[GatePoint], dir: &Path) -> Result<PathBuf> {
    let mut c = Csv::new();
    for g in points {
        c.estimate(g.phi, "gate", "fidelity", &g.fidelity);
        c.estimate(g.phi, "gate", "purity", &g.purity);
        c.estimate(g.phi, "gate", "fidelity_optimized", &g.optimized_fidelity);
        c.row(g.phi, "gate", "fidelity_theory", g.theory_fidelity, 0.0);
        c.row(g.phi, "gate", "purity_theory", g.theory_purity, 0.0);
    }
    let p = dir.join(FIG7);
    write_atomic(&p, c.0.as_bytes())?;
    Ok(p)
}

#[derive(Serialize)]
struct Manifest<'a> {
    software: &'a str,
    version: &'a str,
    command: &'a str,
    seed: u64,
    config: &'a ScenarioConfig,
    outputs: Vec<String>,
}

pub fn write_manifest(dir: &Path, command: &str, config: &ScenarioConfig, outputs: &[PathBuf]) -> Result<PathBuf> {
    let m = Manifest {
        software: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed: config.seed,
        config,
        outputs: outputs
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
    };
    let body = serde_json::to_string_pretty(&m).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let p = dir.join(MANIFEST);
    write_atomic(&p, format!("{body}\n").as_bytes())?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_content() {
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join("x.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(d.path()).unwrap().count(), 1);
    }

    #[test]
    fn unwritable_directory_is_reported() {
        let p = Path::new("/nonexistent-dir-for-test/x.csv");
        assert!(matches!(write_atomic(p, b"x"), Err(Error::Output { .. })));
    }
}
