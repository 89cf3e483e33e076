//! End-to-end checks of the binary: exit codes, determinism, and the
//! headline numbers for each subcommand.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gpt-selftest"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

#[test]
fn odd_table_reports_the_known_pentagon_value() {
    let out = run(&["table-odd", "--n-max", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("n,kind,optimum,formula_value,abs_diff,problems_solved,wall_time"));
    assert!(text.contains("5,odd,0.8027864045,0.8027864045,0.0000000000"));
    assert!(text.contains(",-\n"), "timing column stays dashed without --timing");
}

#[test]
fn selfdual_table_reports_the_square_row() {
    let out = run(&["table-selfdual", "--n-max", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("4,selfdual,0.7500000000"));
    assert!(text.contains("6,selfdual,0.8125000000"));
}

#[test]
fn gbit_emits_one_exact_json_report_per_window() {
    let out = run(&["gbit", "--epsilon", "1/16,1/8"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let first: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(first["schema"], 1);
    assert_eq!(first["epsilon"], "1/16");
    assert_eq!(first["vertex_count"], 80);
    assert_eq!(first["ray_count"], 80);
    assert_eq!(first["p_win_upper"], "4/5");
    assert_eq!(first["matches_closed_form"], true);
    let second: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
    assert_eq!(second["vertex_count"], 16);
    assert_eq!(second["p_win_upper"], "3/4");
}

#[test]
fn quantum_prints_the_ceiling_and_four_tables() {
    let out = run(&["quantum"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("winning probability: 0.8535533906"));
    assert_eq!(text.matches("announcement (").count(), 4);
    assert_eq!(text.matches("0.4267766953").count(), 32);
}

#[test]
fn figure2_ends_with_the_limit_marker() {
    let out = run(&["figure2", "--n-max", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("n,lp_point,curve_value"));
    assert!(text.ends_with("limit,-,0.8535533906\n"));
}

#[test]
fn classical_check_finds_no_violations() {
    let out = run(&["classical-check", "--samples", "25", "--seed", "11"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["violations"], 0);
    assert_eq!(v["decomposition_mismatches"], 0);
    assert_eq!(v["samples"], 25);
}

#[test]
fn enumerate_round_trips_a_cone_file() {
    let dir = tempfile::tempdir().unwrap();
    let h_path = dir.path().join("orthant.cone");
    std::fs::write(&h_path, "H 3\nineq 1 0 0\nineq 0 1 0\nineq 0 0 1\n").unwrap();
    let out = run(&["enumerate", h_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rays = stdout(&out);
    assert!(rays.starts_with("V 3"));
    let v_path = dir.path().join("orthant-v.cone");
    std::fs::write(&v_path, &rays).unwrap();
    let back = run(&["enumerate", v_path.to_str().unwrap()]);
    assert_eq!(back.status.code(), Some(0));
    assert!(stdout(&back).starts_with("H 3"));
    assert_eq!(stdout(&back).lines().count(), 4, "three facets come back");
}

#[test]
fn identical_invocations_are_byte_identical() {
    for args in [
        vec!["gbit", "--epsilon", "1/10"],
        vec!["table-selfdual", "--n-max", "4"],
        vec!["quantum"],
        vec!["classical-check", "--samples", "10", "--seed", "3"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = bin()
        .args(["gbit", "--epsilon", "1/8", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"p_win_upper\":\"3/4\""));
}

#[test]
fn usage_errors_exit_with_three() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(3));
    assert_eq!(run(&["table-odd", "--n-max", "31"]).status.code(), Some(3));
    assert_eq!(run(&["table-odd", "--n-max", "4"]).status.code(), Some(3));
    assert_eq!(run(&["gbit", "--epsilon", "1/7"]).status.code(), Some(3));
    assert_eq!(run(&["gbit", "--epsilon", "nonsense"]).status.code(), Some(3));
    assert_eq!(run(&["gbit", "--mode", "approx"]).status.code(), Some(3));
    assert_eq!(run(&["table-odd", "--n-max", "5", "--mode", "exact"]).status.code(), Some(3));
    assert_eq!(run(&["enumerate", "/definitely/not/here.cone"]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn jobs_settings_are_validated_and_respected() {
    let ok = bin()
        .args(["table-odd", "--n-max", "5", "--jobs", "1"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let from_env = bin()
        .args(["table-odd", "--n-max", "5"])
        .env("GPT_SELFTEST_JOBS", "1")
        .output()
        .unwrap();
    assert_eq!(from_env.status.code(), Some(0));
    assert_eq!(ok.stdout, from_env.stdout);
    let bad = bin()
        .args(["table-odd", "--n-max", "5"])
        .env("GPT_SELFTEST_JOBS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn json_format_is_available_for_tables() {
    let out = run(&["table-selfdual", "--n-max", "4", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["rows"][0]["n"], 4);
    assert_eq!(v["rows"][0]["optimum"], "0.7500000000");
    let csv = run(&["gbit", "--epsilon", "1/16", "--format", "csv"]);
    assert!(stdout(&csv).contains("epsilon,vertex_count,ray_count"));
    assert!(stdout(&csv).contains("1/16,80,80"));
}
