use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn catsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catsim")).args(args).env("CATSIM_LOG", "error").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json_field(o: &Output, key: &str) -> f64 {
    let v: serde_json::Value = serde_json::from_str(&stdout(o)).unwrap();
    v[key].as_f64().unwrap()
}

#[test]
fn feasibility_discussion_preset_warns() {
    let dir = tempfile::tempdir().unwrap();
    let out = catsim(&["feasibility", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("tau_trap"));
    assert!(text.contains("overall: warn"));
    let csv = fs::read_to_string(dir.path().join("feasibility.csv")).unwrap();
    assert!(csv.starts_with("constraint,relation,lhs,rhs,margin,grade"));
}

#[test]
fn failing_override_still_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = catsim(&["feasibility", "--override", "trap.radiation_force_N=1e-14", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let csv = fs::read_to_string(dir.path().join("feasibility.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("free fall") && l.ends_with("fail")));
    assert!(dir.path().join("feasibility.txt").exists());
}

#[test]
fn empty_config_lists_missing_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.json");
    fs::write(&cfg, "{}").unwrap();
    let out = catsim(&["feasibility", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("trap.paul_soft_rad_per_s"));
    assert!(err.contains("atom.mass_kg: missing required key"));
}

#[test]
fn protocol_discussion_values() {
    let out = catsim(&["protocol"]);
    assert!(out.status.success());
    assert!((json_field(&out, "p_down") - 0.799).abs() < 1e-3);
    assert!((json_field(&out, "phi_grav") - 0.930).abs() < 1e-3);
}

#[test]
fn protocol_zero_beta() {
    let out = catsim(&["protocol", "--beta", "0"]);
    assert_eq!(json_field(&out, "p_down"), 1.0);
}

#[test]
fn protocol_thermal_spread() {
    let out = catsim(&["protocol", "--thermal", "10", "--samples", "200", "--seed", "42"]);
    assert!(out.status.success());
    assert!(json_field(&out, "p_down_std") < 1e-9);
    assert_eq!(json_field(&out, "runs"), 200.0);
}

#[test]
fn protocol_refuses_failed_constraints_without_force() {
    let out = catsim(&["protocol", "--override", "trap.radiation_force_N=1e-14"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("free fall"));
    let forced = catsim(&["protocol", "--override", "trap.paul_stiff_rad_per_s=2e6", "--force"]);
    assert!(forced.status.success(), "{}", String::from_utf8_lossy(&forced.stderr));
}

fn files_equal(a: &Path, b: &Path, name: &str) -> bool {
    fs::read(a.join(name)).unwrap() == fs::read(b.join(name)).unwrap()
}

#[test]
fn protocol_output_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, workers) in [(&a, "1"), (&b, "4")] {
        let out = catsim(&["protocol", "--thermal", "2", "--samples", "16", "--seed", "7", "--workers", workers, "--out", dir.path().to_str().unwrap()]);
        assert!(out.status.success());
    }
    assert!(files_equal(a.path(), b.path(), "protocol_steps.jsonl"));
    assert!(files_equal(a.path(), b.path(), "protocol_summary.csv"));
    let steps = fs::read_to_string(a.path().join("protocol_steps.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(steps.lines().next().unwrap()).unwrap();
    assert_eq!(first["run"], 0);
    assert_eq!(first["levels"][0], "down");
}

#[test]
fn transient_figure_preset() {
    let dir = tempfile::tempdir().unwrap();
    let out = catsim(&["transient", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("2 oscillations"));
    let csv = fs::read_to_string(dir.path().join("transient.csv")).unwrap();
    let mut lines = csv.lines();
    lines.next();
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert_eq!(first[5], 0.0);
    assert_eq!(first[6], 0.0);
    assert_eq!(first[7], 0.0);
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!((1.2e6..1.3e6).contains(&last[0]));
}

#[test]
fn verify_quick_passes_and_mutation_fails() {
    let out = catsim(&["verify", "--quick"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let bad = catsim(&["verify", "--quick", "--flip-boost-sign"]);
    assert_eq!(bad.status.code(), Some(1));
    let failed: Vec<String> = stdout(&bad).lines().filter(|l| l.starts_with("FAIL")).map(String::from).collect();
    assert_eq!(failed.len(), 1);
    assert!(failed[0].contains("boost"));
}

#[test]
fn sweep_writes_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = catsim(&[
        "sweep", "--parameter", "trap.paul_soft_rad_per_s", "--from", "1e-7", "--to", "1e-3", "--steps", "5", "--log", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    let grades: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(grades, ["fail", "warn", "warn", "fail", "fail"]);
}
