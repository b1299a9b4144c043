//! End-to-end tests of the wwbkit binary: exit codes, error reporting, and
//! the CSV surface.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wwbkit"))
}

fn scenario_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

#[test]
fn missing_scenario_file_exits_2_and_names_the_path() {
    let out = bin()
        .args([
            "bound",
            "--scenario",
            "/nonexistent/nope.json",
            "--out",
            "/tmp/unused.csv",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("/nonexistent/nope.json"), "{stderr}");
}

#[test]
fn malformed_scenario_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = bin()
        .args(["bound", "--scenario"])
        .arg(&path)
        .args(["--out", "/tmp/unused.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_validation_suite_exits_2() {
    let out = bin().args(["validate", "bogus-suite"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_trials_override_fails_before_compute() {
    let scenario = scenario_dir().join("ula8_unconditional.json");
    let out = bin()
        .args(["mse", "--scenario"])
        .arg(&scenario)
        .args(["--out", "/tmp/unused.csv", "--trials", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bound_emits_expected_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("bound.csv");
    let scenario = scenario_dir().join("ula8_unconditional.json");
    let out = bin()
        .args(["bound", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out_path)
        .args(["--h-grid", "0.01:1.9:64", "--workers", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "snr_db,model,wwb,best_h,best_s,objective,skipped"
    );
    assert_eq!(lines.count(), 9); // one row per sweep point
}

#[test]
fn s_stationarity_suite_passes_through_cli() {
    let out = bin()
        .args(["validate", "s-stationarity", "--seed", "20260811"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("[PASS] s-stationarity"), "{stdout}");
}

#[test]
fn sweep_delta_requires_vshape() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("bound.csv");
    let scenario = scenario_dir().join("ula8_unconditional.json");
    let out = bin()
        .args(["bound", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out_path)
        .args(["--sweep-delta", "30:90:30"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_delta_writes_one_table_per_angle() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("vee.csv");
    let scenario = dir.path().join("vee.json");
    std::fs::write(
        &scenario,
        r#"{
            "name": "vee-tiny",
            "geometry": { "kind": "vshape", "per_branch": 3, "delta_deg": 60.0, "spacing": 0.5 },
            "model": { "kind": "conditional", "snapshots": 5 },
            "prior": [ { "kind": "uniform", "a": -1.0, "b": 1.0 },
                       { "kind": "uniform", "a": -1.0, "b": 1.0 } ],
            "snr_sweep_db": [-10.0],
            "optimizer": { "h_grid": { "min": 0.05, "max": 1.9, "count": 16 } }
        }"#,
    )
    .unwrap();
    let out = bin()
        .args(["bound", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out_path)
        .args(["--sweep-delta", "45:90:45"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("vee_delta45.csv").exists());
    assert!(dir.path().join("vee_delta90.csv").exists());
}

#[test]
fn workers_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("bound.csv");
    let scenario = scenario_dir().join("ula8_unconditional.json");
    let out = bin()
        .args(["bound", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out_path)
        .args(["--h-grid", "0.01:1.9:32"])
        .env("WWBKIT_WORKERS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}
