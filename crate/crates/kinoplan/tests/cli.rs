use std::process::Command;

use kinoplan::{io, verify, Scenario};
use kinoplan_core::Limits;

fn kinoplan(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_kinoplan")).args(args).output().unwrap()
}

#[test]
fn show_scenario_round_trips() {
    let out = kinoplan(&["show-scenario", "--preset", "double_wall"]);
    assert!(out.status.success());
    let s = io::parse_scenario(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(s, Scenario::double_wall());
}

#[test]
fn generate_plan_and_refine() {
    let dir = tempfile::tempdir().unwrap();
    let p = |f: &str| dir.path().join(f).to_str().unwrap().to_string();
    let out = kinoplan(&["gen-env", "--kind", "forest", "--seed", "3", "--out", &p("grid.json")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = kinoplan(&[
        "plan", "--grid", &p("grid.json"), "--seed", "3", "--start", "2,2,1.5", "--goal", "27,26,1.5", "--out", &p("front.json"),
        "--csv", &p("front.csv"),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = kinoplan(&["refine", "--grid", &p("grid.json"), "--trajectory", &p("front.json"), "--out", &p("refined.json")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let grid = io::load_grid(dir.path().join("grid.json").as_path()).unwrap();
    let front = io::load_trajectory_json(&dir.path().join("front.json")).unwrap();
    let refined = io::load_trajectory_json(&dir.path().join("refined.json")).unwrap();
    let dt = grid.default_check_dt(Limits::default().v_max);
    assert_eq!(verify::verify_trajectory(&refined, &grid, &Limits::default(), dt), Ok(()));
    assert!(verify::endpoint_error(&refined, &front.start_state(), &front.end_state()) < 1e-9);
    let csv = std::fs::read_to_string(dir.path().join("front.csv")).unwrap();
    assert!(csv.lines().count() > 10);
}

#[test]
fn batch_commands_write_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = kinoplan(&["bench-frontend", "--preset", "forest", "--trials", "2", "--methods", "krrt_with", "--output-dir", out_dir]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["trials.csv", "summary.csv", "timing.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let out = kinoplan(&["bench-regional", "--edges", "5", "--output-dir", out_dir]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(dir.path().join("regional.csv")).unwrap().lines().count(), 6);
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(kinoplan(&["show-scenario", "--preset", "nowhere"]).status.code(), Some(2));
    assert_eq!(kinoplan(&["bench-frontend", "--methods", "rrt", "--trials", "1", "--output-dir", "/tmp/never"]).status.code(), Some(2));
}
