use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn darkstate(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_darkstate"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("phi,state_label,metric,value,std"));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn protocol_writes_ideal_artifacts() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("ideal.cfg"), "phi_grid = [\"pi/2\", \"pi\"]\nbootstrap_samples = 20\n").unwrap();
    let out = darkstate(&["protocol", "--config", "ideal.cfg", "--out", "res"], d.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 2);
    assert!(stdout.lines().next().unwrap().starts_with("phi=1.5708"));

    let res = d.path().join("res");
    for f in ["fig3_purity_fidelity_success.csv", "fig4_population.csv", "fig5_channel.csv", "manifest.json"] {
        assert!(res.join(f).exists(), "{f}");
    }
    let fig3 = rows(&res.join("fig3_purity_fidelity_success.csv"));
    let theory: Vec<f64> = fig3
        .iter()
        .filter(|r| r[2] == "fidelity_theory" || r[2] == "purity_theory")
        .map(|r| r[3].parse().unwrap())
        .collect();
    assert_eq!(theory.len(), 24);
    assert!(theory.iter().all(|v| (v - 1.0).abs() < 1e-10));
    for r in fig3.iter().filter(|r| !r[2].starts_with("success")) {
        let v: f64 = r[3].parse().unwrap();
        assert!((0.0..=1.0).contains(&v), "{r:?}");
    }
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(res.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "protocol");
    assert_eq!(manifest["config"]["bootstrap_samples"], 20);
    assert!(manifest["version"].is_string());
}

#[test]
fn reference_at_pi_halves_purity_of_plus() {
    let d = tempfile::tempdir().unwrap();
    let out = darkstate(&["reference", "--set", "phi_grid=[0.0, \"pi\"]", "--bootstrap", "0", "--out", "."], d.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fig3 = rows(&d.path().join("fig3_purity_fidelity_success.csv"));
    let at = |metric: &str| -> f64 {
        fig3.iter()
            .find(|r| r[0].parse::<f64>().unwrap() == std::f64::consts::PI && r[1] == "+" && r[2] == metric)
            .unwrap()[3]
            .parse()
            .unwrap()
    };
    assert!((at("purity_theory") - 0.5).abs() < 1e-12);
    assert!((at("purity") - 0.5).abs() < 0.1);
}

#[test]
fn identical_runs_are_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    let args = |o: &'static str| {
        vec!["protocol", "--set", "phi_grid=[1.0, 2.0]", "--set", "noise.herald_error=0.05", "--seed", "17", "--bootstrap", "30", "--out", o]
    };
    assert!(darkstate(&args("a"), d.path()).status.success());
    assert!(darkstate(&args("b"), d.path()).status.success());
    for f in ["fig3_purity_fidelity_success.csv", "fig4_population.csv", "fig5_channel.csv", "manifest.json"] {
        assert_eq!(fs::read(d.path().join("a").join(f)).unwrap(), fs::read(d.path().join("b").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn configuration_errors_exit_with_two() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("bad.cfg"), "[noise]\nherald_error = 1.5\n").unwrap();
    let out = darkstate(&["protocol", "--config", "bad.cfg"], d.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");

    assert_eq!(darkstate(&["protocol", "--config", "missing.cfg"], d.path()).status.code(), Some(2));
    assert_eq!(darkstate(&["protocol", "--set", "colour=red"], d.path()).status.code(), Some(2));
    assert_eq!(darkstate(&["frobnicate"], d.path()).status.code(), Some(2));
    assert!(!d.path().join("out").exists());
}

#[test]
fn unwritable_output_exits_with_three() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("blocker"), "").unwrap();
    let out = darkstate(&["protocol", "--set", "phi_grid=[1.0]", "--bootstrap", "0", "--out", "blocker/sub"], d.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn gate_tomography_requires_budget_flag() {
    let d = tempfile::tempdir().unwrap();
    let out = darkstate(&["gate-tomo", "--out", "."], d.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("--full-3q-tomo"));
    let out = darkstate(&["gate-tomo", "--full-3q-tomo", "--set", "phi_grid=[\"pi\"]", "--bootstrap", "0", "--out", "."], d.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fig7 = rows(&d.path().join("fig7_gate.csv"));
    assert_eq!(fig7.len(), 5);
}

#[test]
fn channel_command_writes_channel_table() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("ref.cfg"), "mode = \"reference\"\nphi_grid = [\"pi\"]\nbootstrap_samples = 0\n").unwrap();
    let out = darkstate(&["channel", "--config", "ref.cfg", "--out", "."], d.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fig5 = rows(&d.path().join("fig5_channel.csv"));
    let f: f64 = fig5.iter().find(|r| r[2] == "fidelity_theory").unwrap()[3].parse().unwrap();
    assert!((f - 0.5).abs() < 1e-12);
    assert!(!d.path().join("fig3_purity_fidelity_success.csv").exists());
}

#[test]
fn selftest_passes() {
    let d = tempfile::tempdir().unwrap();
    let out = darkstate(&["selftest"], d.path());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), 10);
}
