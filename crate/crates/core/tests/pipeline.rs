//! End-to-end tests of the `wavesplit` binary: artifact layout, exit codes,
//! and cross-command workflows (calibrate → diagnose, sweep).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const STRING_MIXTURE: &str = r#"
system = "string"

[grid]
length = 40.0
points = 512

[params]
c = 1.0

[[pulses]]
mode = "right"
center = -5.0
width = 1.0
amplitude = 1.0

[[pulses]]
mode = "left"
center = 5.0
width = 1.0
amplitude = 0.3

[observation]
x_obs = 0.0
dx = 0.2
dt = 0.05
t_start = 0.0
t_end = 10.0
noise_sigma = 0.01
seed = 7

[diagnostics]
t_zero = 0.0

[output]
directory = "unused"
"#;

const STRING_PURE_RIGHT: &str = r#"
system = "string"

[grid]
length = 40.0
points = 512

[params]
c = 1.0

[[pulses]]
mode = "right"
center = -5.0
width = 1.0
amplitude = 1.0

[observation]
x_obs = 0.0
dx = 0.2
dt = 0.05
t_start = 0.0
t_end = 10.0
noise_sigma = 0.01
seed = 7

[diagnostics]
t_zero = 0.0

[output]
directory = "unused"
"#;

const STRING_SHORT: &str = r#"
system = "string"

[grid]
length = 40.0
points = 512

[params]
c = 1.0

[[pulses]]
mode = "right"
center = -5.0
width = 1.0
amplitude = 1.0

[observation]
x_obs = 0.0
dx = 0.2
dt = 0.1
t_start = 0.0
t_end = 1.0
noise_sigma = 0.0
seed = 7

[diagnostics]
t_zero = 0.0

[output]
directory = "unused"
"#;

const HYPERBOLIC_PURE_RIGHT: &str = r#"
system = "hyperbolic"

[grid]
length = 40.0
points = 512

[params]
epsilon = 0.05
b_profile = { kind = "constant", baseline = 1.0 }
c_profile = { kind = "constant", baseline = 1.0 }

[[pulses]]
mode = "right"
center = -5.0
width = 1.0
amplitude = 1.0

[observation]
x_obs = 0.0
dt = 0.05
t_start = 0.0
t_end = 10.0
noise_sigma = 0.0
seed = 1

[diagnostics]
t_zero = 0.0

[output]
directory = "unused"
"#;

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).expect("write config");
    path
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavesplit"))
        .args(args)
        .output()
        .expect("launch wavesplit binary")
}

fn assert_success(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn assert_exit_code(out: &Output, expected: i32, what: &str) {
    assert_eq!(
        out.status.code(),
        Some(expected),
        "{what}: expected exit code {expected}, stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read_json(path: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("read {}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("parse {}: {e}", path.display()))
}

#[test]
fn simulate_writes_one_state_file_per_frame() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "short.toml", STRING_SHORT);
    let out_dir = tmp.path().join("out");

    let out = cli(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_success(&out, "simulate");

    // t ∈ [0, 1] at dt = 0.1: 11 frames.
    for i in 0..11 {
        let state = out_dir.join(format!("state_{i:04}.csv"));
        assert!(state.is_file(), "missing {}", state.display());
        let body = std::fs::read_to_string(&state).unwrap();
        let mut lines = body.lines();
        assert_eq!(lines.next(), Some("x,v,w"), "state file header");
        assert_eq!(lines.count(), 512, "one row per grid point");
    }
    assert!(!out_dir.join("state_0011.csv").exists(), "too many frames");

    let norms = std::fs::read_to_string(out_dir.join("norms.csv")).unwrap();
    let mut lines = norms.lines();
    assert_eq!(lines.next(), Some("t,norm"), "norms header");
    assert_eq!(lines.count(), 11, "one norms row per frame");

    let manifest = read_json(&out_dir.join("manifest.json"));
    assert_eq!(manifest["command"], "simulate");
    assert!(manifest["tolerances"].is_object());
}

#[test]
fn invalid_config_exits_2_and_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    // Pulse width below the 4-spacing resolution limit.
    let bad = STRING_SHORT.replace("width = 1.0", "width = 0.1");
    let cfg = write_config(tmp.path(), "bad.toml", &bad);
    let out_dir = tmp.path().join("out");

    let out = cli(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_exit_code(&out, 2, "under-resolved pulse");
    assert!(
        !out_dir.exists(),
        "output directory must not be created for a rejected config"
    );

    // Unknown keys are config errors too.
    let bad = STRING_SHORT.replace("seed = 7", "seed = 7\nbogus_knob = 1.0");
    let cfg = write_config(tmp.path(), "unknown-key.toml", &bad);
    let out = cli(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_exit_code(&out, 2, "unknown config key");
    assert!(!out_dir.exists());
}

#[test]
fn missing_config_file_is_an_io_error() {
    let out = cli(&["simulate", "--config", "/nonexistent/nowhere.toml"]);
    assert_exit_code(&out, 4, "missing config file");
}

#[test]
fn calibrate_then_diagnose_produces_full_report() {
    let tmp = tempfile::tempdir().unwrap();
    let pure = write_config(tmp.path(), "pure.toml", STRING_PURE_RIGHT);
    let mixture = write_config(tmp.path(), "mixture.toml", STRING_MIXTURE);
    let cal_dir = tmp.path().join("cal");
    let diag_dir = tmp.path().join("diag");

    let out = cli(&[
        "calibrate",
        "--config",
        pure.to_str().unwrap(),
        "--out",
        cal_dir.to_str().unwrap(),
        "--trials",
        "20",
    ]);
    assert_success(&out, "calibrate");
    let calibration = read_json(&cal_dir.join("calibration.json"));
    assert!(calibration["delta"].as_f64().unwrap() > 0.0);
    assert_eq!(calibration["trials"], 20);
    assert_eq!(calibration["sigma"], 0.01);
    assert_eq!(calibration["stencil"]["dx"], 0.2);

    let out = cli(&[
        "diagnose",
        "--config",
        mixture.to_str().unwrap(),
        "--calibration",
        cal_dir.join("calibration.json").to_str().unwrap(),
        "--out",
        diag_dir.to_str().unwrap(),
    ]);
    assert_success(&out, "diagnose");

    let report = read_json(&diag_dir.join("report.json"));
    let detected: Vec<&str> = report["detected"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert!(
        detected.contains(&"right") && detected.contains(&"left"),
        "mixture should flag both directed modes, got {detected:?}"
    );
    assert!(report["arrival_time"].is_number());
    assert!(report["source_position"].is_number());
    assert!(report["weights"]["alpha_hat"].as_f64().unwrap() > 0.9);
    let beta_hat = report["weights"]["beta_hat"].as_f64().unwrap();
    assert!(
        (0.1..0.6).contains(&beta_hat),
        "beta_hat {beta_hat} out of the expected mixture range"
    );
    assert!(report["waveform"]["right"].is_object());
    assert!(diag_dir.join("waveform.csv").is_file());
    assert!(diag_dir.join("waveform_right.csv").is_file());
    let manifest = read_json(&diag_dir.join("manifest.json"));
    assert_eq!(manifest["command"], "diagnose");
    assert!(manifest["calibration"]["delta"].is_number());
}

#[test]
fn diagnose_rejects_missing_or_mismatched_calibration() {
    let tmp = tempfile::tempdir().unwrap();
    let mixture = write_config(tmp.path(), "mixture.toml", STRING_MIXTURE);
    let diag_dir = tmp.path().join("diag");

    // Missing calibration file: I/O error, nothing simulated.
    let out = cli(&[
        "diagnose",
        "--config",
        mixture.to_str().unwrap(),
        "--calibration",
        tmp.path().join("absent.json").to_str().unwrap(),
        "--out",
        diag_dir.to_str().unwrap(),
    ]);
    assert_exit_code(&out, 4, "missing calibration");
    assert!(!diag_dir.join("report.json").exists());

    // Calibration taken at a different noise level: precondition failure.
    let pure_other_sigma = STRING_PURE_RIGHT.replace("noise_sigma = 0.01", "noise_sigma = 0.02");
    let pure = write_config(tmp.path(), "pure-other.toml", &pure_other_sigma);
    let cal_dir = tmp.path().join("cal");
    let out = cli(&[
        "calibrate",
        "--config",
        pure.to_str().unwrap(),
        "--out",
        cal_dir.to_str().unwrap(),
        "--trials",
        "10",
    ]);
    assert_success(&out, "calibrate at sigma 0.02");
    let out = cli(&[
        "diagnose",
        "--config",
        mixture.to_str().unwrap(),
        "--calibration",
        cal_dir.join("calibration.json").to_str().unwrap(),
        "--out",
        diag_dir.to_str().unwrap(),
    ]);
    assert_exit_code(&out, 3, "sigma mismatch between calibration and scenario");
}

#[test]
fn calibrate_requires_a_pure_right_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let mixture = write_config(tmp.path(), "mixture.toml", STRING_MIXTURE);
    let out = cli(&[
        "calibrate",
        "--config",
        mixture.to_str().unwrap(),
        "--out",
        tmp.path().join("cal").to_str().unwrap(),
        "--trials",
        "10",
    ]);
    assert_exit_code(&out, 2, "calibration on a mixture scenario");
}

#[test]
fn noiseless_direct_calibration_is_pure_roundoff() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "hyperbolic.toml", HYPERBOLIC_PURE_RIGHT);
    let cal_dir = tmp.path().join("cal");
    let out = cli(&[
        "calibrate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        cal_dir.to_str().unwrap(),
        "--trials",
        "10",
    ]);
    assert_success(&out, "noiseless direct calibrate");
    let calibration = read_json(&cal_dir.join("calibration.json"));
    let delta = calibration["delta"].as_f64().unwrap();
    assert!(
        delta <= 1e-10,
        "noiseless direct sampling should calibrate to roundoff, got delta = {delta:e}"
    );
    assert!(
        calibration["stencil"].is_null(),
        "direct sampling must not record a stencil"
    );
}

#[test]
fn sweep_scans_epsilon_and_reports_commutator_halving() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "hyperbolic.toml", HYPERBOLIC_PURE_RIGHT);
    let out_dir = tmp.path().join("sweep");
    let out = cli(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--axis",
        "epsilon",
        "--values",
        "0.04,0.02,0.01",
        "--workers",
        "3",
    ]);
    assert_success(&out, "epsilon sweep");

    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[0], "epsilon");
    let commutator_col = header
        .iter()
        .position(|&h| h == "commutator_norm")
        .expect("commutator column for a hyperbolic sweep");
    let rows: Vec<Vec<f64>> = lines
        .map(|line| line.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3, "one row per swept value");
    for (row, expected) in rows.iter().zip([0.04, 0.02, 0.01]) {
        assert_eq!(row[0], expected, "axis column echoes the swept value");
    }
    for w in rows.windows(2) {
        let ratio = w[0][commutator_col] / w[1][commutator_col];
        assert!(
            (1.7..=2.3).contains(&ratio),
            "commutator should halve with epsilon, got ratio {ratio}"
        );
    }
    for i in 0..3 {
        assert!(
            out_dir.join(format!("point_{i:03}")).join("report.json").is_file(),
            "per-point report missing for point {i}"
        );
    }
    let manifest = read_json(&out_dir.join("manifest.json"));
    assert_eq!(manifest["axis"], "epsilon");
    assert_eq!(manifest["workers"], 3);
}

#[test]
fn sweep_rejects_unknown_or_mismatched_axes() {
    let tmp = tempfile::tempdir().unwrap();
    let hyperbolic = write_config(tmp.path(), "hyperbolic.toml", HYPERBOLIC_PURE_RIGHT);
    let string = write_config(tmp.path(), "string.toml", STRING_SHORT);
    let out_dir = tmp.path().join("sweep");

    let out = cli(&[
        "sweep",
        "--config",
        hyperbolic.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--axis",
        "bogus",
        "--values",
        "1.0",
    ]);
    assert_exit_code(&out, 2, "unknown sweep axis");

    // epsilon is a hyperbolic parameter; sweeping it on a string scenario
    // is a configuration error.
    let out = cli(&[
        "sweep",
        "--config",
        string.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--axis",
        "epsilon",
        "--values",
        "0.05,0.025",
    ]);
    assert_exit_code(&out, 2, "epsilon axis on a string scenario");

    // Missing --values is a usage error (clap exits 2).
    let out = cli(&[
        "sweep",
        "--config",
        hyperbolic.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--axis",
        "epsilon",
    ]);
    assert_exit_code(&out, 2, "missing --values");
}

#[test]
fn sweep_with_calibration_uses_it_for_detection() {
    let tmp = tempfile::tempdir().unwrap();
    let pure = write_config(tmp.path(), "pure.toml", STRING_PURE_RIGHT);
    let cal_dir = tmp.path().join("cal");
    let out = cli(&[
        "calibrate",
        "--config",
        pure.to_str().unwrap(),
        "--out",
        cal_dir.to_str().unwrap(),
        "--trials",
        "10",
    ]);
    assert_success(&out, "calibrate");

    // Sweep the noise level of the same scenario with the calibrated
    // threshold: the pure right mode must stay detected, and the left mode
    // stays below threshold at matching noise.
    let out_dir = tmp.path().join("sweep");
    let out = cli(&[
        "sweep",
        "--config",
        pure.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--axis",
        "noise_sigma",
        "--values",
        "0.01",
        "--calibration",
        cal_dir.join("calibration.json").to_str().unwrap(),
    ]);
    assert_success(&out, "noise sweep with calibration");

    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|&h| h == name).unwrap();
    let row: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(row[col("detected_right")], 1.0);
    assert_eq!(row[col("detected_left")], 0.0);
}
