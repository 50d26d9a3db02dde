use std::path::Path;
use std::process::{Command, Output};

use kuramoto_wave::harness::config::{Config, ExperimentConfig};
use kuramoto_wave::harness::manifest::read_manifest;
use proptest::prelude::*;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kuramoto-wave"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn repo_config(name: &str) -> String {
    format!("{}/../../configs/{}", env!("CARGO_MANIFEST_DIR"), name)
}

#[test]
fn stationary_writes_profile_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["stationary", "--config", &repo_config("two_point.cfg"), "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("r_delta"));
    assert!(dir.path().join("profile.csv").exists());
    let m = read_manifest(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(m.command, "stationary");
    assert!(m.constants["r_delta"] > 0.0 && m.constants["r_delta"] < 1.0);
    assert!(m.outputs.contains(&"profile.csv".to_string()));
    assert_eq!(m.config["model"]["K"], "2");
}

#[test]
fn spectrum_reports_constants() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = write_config(dir.path(), "[model]\nK = 2\ndelta = 0.3\nn_modes = 32\nn_grid = 128\n");
    let o = run(&["spectrum", "--config", &cfg, "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_manifest(&dir.path().join("manifest.json")).unwrap();
    assert!(m.constants["gamma_L"] > 0.0);
    assert!(m.constants["C_P"] <= m.constants["C_P_norm"] * (1.0 + 1e-12));
    assert!(m.constants["min_window"] >= 1.0);
    assert!(dir.path().join("eigenvalues.csv").exists());
}

#[test]
fn drift_and_expansion() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = write_config(dir.path(), "[model]\nK = 2\ndelta = 0.01\n[drift]\nxi = -1, 1\n");
    let o = run(&["drift", "--config", &cfg, "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_manifest(&dir.path().join("manifest.json")).unwrap();
    assert!((m.constants["b"] / m.constants["first_order"] - 1.0).abs() < 1e-3);

    let o = run(&["expand", "--config", &repo_config("two_point.cfg"), "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_manifest(&dir.path().join("manifest.json")).unwrap();
    assert!((m.constants["c_b"] - 1.0).abs() < 1e-8);
}

#[test]
fn simulate_short_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = write_config(
        dir.path(),
        "[model]\nK = 2\ndelta = 0.3\nn_modes = 32\nn_grid = 128\n[simulation]\nN = 100\nt_final = 0.5\nsigma = 0.5\n",
    );
    let o = run(&["simulate", "--config", &cfg, "--out", out, "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_manifest(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(m.config["simulation"]["seed"], "3");
    assert!(m.constants["window"] >= 1.0);
    let track = std::fs::read_to_string(dir.path().join("track.csv")).unwrap();
    assert!(track.starts_with("n,T_n,psi_n,nu_norm,in_tube"));
    assert!(track.lines().count() >= 2);
}

#[test]
fn simulate_rejects_short_window_and_large_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let base = "[model]\nK = 2\ndelta = 0.3\nn_modes = 32\nn_grid = 128\n[simulation]\nN = 100\nt_final = 0.5\nsigma = 0.5\n";
    let cfg = write_config(dir.path(), &format!("{}T = 0.5\n", base));
    assert_eq!(run(&["simulate", "--config", &cfg, "--out", out]).status.code(), Some(1));
    let cfg = write_config(dir.path(), &format!("{}dt = 0.05\n", base));
    assert_eq!(run(&["simulate", "--config", &cfg, "--out", out]).status.code(), Some(1));
}

#[test]
fn pde_decay() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = write_config(dir.path(), "[model]\nK = 2\ndelta = 0.3\nn_modes = 32\nn_grid = 128\n[pde]\nt_end = 10\nfit_start = 4\n");
    let o = run(&["pde", "--config", &cfg, "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_manifest(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(m.constants["monotone"], 1.0);
    assert!((m.constants["decay_rate"] / m.constants["gamma_L"] - 1.0).abs() < 0.1);
}

#[test]
fn reproduce_fig1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["reproduce", "fig1", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("fig1_curve.csv").exists());
    assert!(dir.path().join("manifest.json").exists());
    assert_eq!(run(&["reproduce", "fig9", "--out", out]).status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["stationary", "--config", "/nonexistent/x.cfg"]).status.code(), Some(1));
    assert_eq!(run(&["acceptance", "medium", "--out", out]).status.code(), Some(1));
    let cfg = write_config(dir.path(), "[model]\nK = abc\n");
    assert_eq!(run(&["stationary", "--config", &cfg, "--out", out]).status.code(), Some(1));
    // subcritical coupling has no synchronized profile
    let cfg = write_config(dir.path(), "[model]\nK = 0.5\n");
    assert_eq!(run(&["stationary", "--config", &cfg, "--out", out]).status.code(), Some(2));
}

#[test]
fn shipped_configs_parse() {
    for name in ["fig3.cfg", "two_point.cfg"] {
        let c = Config::load(Path::new(&repo_config(name))).unwrap();
        let e = ExperimentConfig::from_config(&c).unwrap();
        assert!(e.grid().is_ok());
        assert_eq!(e.window, None);
    }
}

fn ident() -> impl Strategy<Value = String> {
    "[a-zA-Z_][a-zA-Z0-9_]{0,8}"
}

fn value() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9_.,/+-]([a-zA-Z0-9_.,/+ -]{0,10}[a-zA-Z0-9_.,/+-])?"
}

proptest! {
    #[test]
    fn config_roundtrip(entries in prop::collection::vec((ident(), ident(), value()), 0..20)) {
        let mut c = Config::default();
        for (s, k, v) in &entries {
            c.set(s, k, v);
        }
        let back: Config = c.to_string().parse().unwrap();
        prop_assert_eq!(back, c);
    }
}

#[test]
fn verdict_table_format() {
    use kuramoto_wave::harness::acceptance::{write_verdicts, CriterionResult};
    let r = CriterionResult {
        id: 3,
        name: "symmetric drift null",
        passed: false,
        seconds: 1.25,
        budget_seconds: 30.0,
        detail: "max |b| = \"x\"".into(),
    };
    let mut buf = Vec::new();
    write_verdicts(std::slice::from_ref(&r), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "criterion,name,passed,seconds,budget_seconds,detail");
    assert_eq!(lines[1], "3,symmetric drift null,false,1.250,30,\"max |b| = 'x'\"");
    assert!(r.to_string().contains("FAIL"));
}
