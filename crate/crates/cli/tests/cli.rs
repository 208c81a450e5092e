use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sweep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sweep"))
        .args(args)
        .env_remove("SWEEP_SEED")
        .env_remove("SWEEP_MULTISTART")
        .output()
        .expect("binary runs")
}

fn scenario(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.json"))
        .display()
        .to_string()
}

fn read(dir: &Path, file: &str) -> String {
    std::fs::read_to_string(dir.join(file)).unwrap_or_else(|e| panic!("{file}: {e}"))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_trajectory_and_audit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = sweep(&["run", "--scenario", &scenario("half_plane"), "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = read(dir.path(), "trajectory.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,u_1,u_2,delta_1,delta_2"));
    assert_eq!(csv.lines().count(), 12);
    assert!(csv.lines().last().unwrap().ends_with(",,"));
    let audit: serde_json::Value = serde_json::from_str(&read(dir.path(), "audit.json")).unwrap();
    assert_eq!(audit["pass"], true);
    assert_eq!(audit["n"], 10);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = dir.path().to_str().unwrap();
        assert_eq!(sweep(&["run", "--scenario", &scenario("ball_slide"), "--out", out]).status.code(), Some(0));
        assert_eq!(sweep(&["converge", "--scenario", &scenario("ball_slide"), "--out", out]).status.code(), Some(0));
        assert_eq!(sweep(&["crowd", "--scenario", &scenario("corridor_crowd"), "--out", out]).status.code(), Some(0));
        assert_eq!(sweep(&["verify", "moreau", "--out", out, "--seed", "4"]).status.code(), Some(0));
    }
    for file in ["trajectory.csv", "audit.json", "convergence.csv", "convergence.json", "frames.csv", "velocity_frames.csv", "crowd.json", "moreau.json"] {
        assert_eq!(read(a.path(), file), read(b.path(), file), "{file}");
    }
}

#[test]
fn converge_reports_first_order() {
    let dir = tempfile::tempdir().unwrap();
    let o = sweep(&["converge", "--scenario", &scenario("ball_slide"), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = read(dir.path(), "convergence.csv");
    assert_eq!(csv.lines().next(), Some("n,gap,fitted_order"));
    let order: f64 = csv.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!(order >= 0.9);
}

#[test]
fn exact_scenarios_report_exact_order() {
    let dir = tempfile::tempdir().unwrap();
    let o = sweep(&["converge", "--scenario", &scenario("half_plane"), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(read(dir.path(), "convergence.csv").lines().skip(1).all(|l| l.ends_with(",exact")));
}

#[test]
fn step_rule_violation_names_minimal_n() {
    let dir = tempfile::tempdir().unwrap();
    let o = sweep(&["run", "--scenario", &scenario("half_plane"), "--n", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("minimal admissible n is 3"), "{}", stderr(&o));
}

#[test]
fn malformed_scenario_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("half_plane")).unwrap().replace("\"horizon\": 1", "\"horizon\": [1]");
    let path = dir.path().join("bad.json");
    std::fs::write(&path, text).unwrap();
    let o = sweep(&["run", "--scenario", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`horizon`"), "{}", stderr(&o));
}

#[test]
fn converge_needs_three_step_counts() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("half_plane")).unwrap().replace("[10, 20, 40, 80]", "[10, 20]");
    let path = dir.path().join("short.json");
    std::fs::write(&path, text).unwrap();
    let o = sweep(&["converge", "--scenario", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_exit_codes() {
    assert_eq!(sweep(&["verify", "corridor"]).status.code(), Some(0));
    assert_eq!(sweep(&["verify", "audit-negative"]).status.code(), Some(3));
    assert_eq!(sweep(&["verify", "hypomonotonicity-negative"]).status.code(), Some(3));
    let o = sweep(&["verify", "nonexistent"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("known suites"));
}

#[test]
fn field_exports_every_cell() {
    let dir = tempfile::tempdir().unwrap();
    let o = sweep(&["field", "--scenario", &scenario("room_exit"), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = read(dir.path(), "field.csv");
    assert_eq!(csv.lines().next(), Some("x,y,value"));
    assert_eq!(csv.lines().count(), 1 + 100 * 100);
    assert!(csv.contains(",inf\n"));
}

#[test]
fn field_requires_a_room() {
    let dir = tempfile::tempdir().unwrap();
    let o = sweep(&["field", "--scenario", &scenario("half_plane"), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn crowd_records_multipliers() {
    let dir = tempfile::tempdir().unwrap();
    let o = sweep(&["crowd", "--scenario", &scenario("corridor_crowd"), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&read(dir.path(), "crowd.json")).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["multipliers"].as_array().unwrap().len(), 50);
    assert_eq!(read(dir.path(), "frames.csv").lines().next(), Some("t,q_1x,q_1y,q_2x,q_2y"));
}
