//! End-to-end checks of the `fockweight` binary: exit codes, JSON reports,
//! and output determinism.

mod common;

use common::{config_path, TWO_CYCLE_ZIGZAG, TWO_LOOP_GEOMETRIC, TWO_LOOP_REPEAT};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fockweight"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn run_bundled_configs_exits_zero() {
    for name in [TWO_LOOP_GEOMETRIC, TWO_CYCLE_ZIGZAG, TWO_LOOP_REPEAT] {
        let path = config_path(name);
        let out = run(&["run", path.to_str().unwrap()]);
        assert!(
            out.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&out.stdout)
        );
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.contains("overall: pass"));
        assert!(!text.contains("FAIL"));
    }
}

#[test]
fn missing_config_exits_two() {
    let out = run(&["run", "/nonexistent/xyz.cfg"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn syntax_error_exits_two() {
    let dir = std::env::temp_dir().join("fockweight-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.cfg");
    std::fs::write(&bad, "graph {\n  vertex x\n  edge e x -> @\n}\n").unwrap();
    let out = run(&["run", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("line 3"), "diagnostic should carry a position: {msg}");
}

#[test]
fn failed_expectation_exits_one() {
    let src = std::fs::read_to_string(config_path(TWO_LOOP_GEOMETRIC)).unwrap();
    let broken = src.replace("expect-dim=31", "expect-dim=30");
    let dir = std::env::temp_dir().join("fockweight-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.cfg");
    std::fs::write(&path, broken).unwrap();
    let out = run(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn dimension_cap_exits_three() {
    let path = config_path(TWO_LOOP_GEOMETRIC);
    let out = run(&["run", path.to_str().unwrap(), "--max-dim", "5"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn json_report_has_schema_and_exact_strings() {
    let path = config_path(TWO_LOOP_GEOMETRIC);
    let out = run(&["run", path.to_str().unwrap(), "--json", "-"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let json_start = text.find('{').expect("json on stdout");
    let v: serde_json::Value = serde_json::from_str(&text[json_start..]).unwrap();
    assert_eq!(v["schema_version"], serde_json::json!(1));
    // exact values travel as strings like "128" or "1/2"
    let bounds = v["tasks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|t| t["task"] == "bounds" && t["params"]["side"] == "right")
        .expect("bounds task present");
    assert_eq!(bounds["details"]["empirical_sup"], serde_json::json!("128"));
}

#[test]
fn reports_are_deterministic_across_processes() {
    let path = config_path(TWO_LOOP_REPEAT);
    let a = run(&["run", path.to_str().unwrap(), "--json", "-"]);
    let b = run(&["run", path.to_str().unwrap(), "--json", "-"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn paths_subcommand_lists_canonical_table() {
    let path = config_path(TWO_CYCLE_ZIGZAG);
    let out = run(&["paths", path.to_str().unwrap(), "--horizon", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let names: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split('\t').nth(1).unwrap())
        .collect();
    assert_eq!(names, vec!["x", "y", "e", "f", "ef", "fe"]);
}

#[test]
fn norms_subcommand_prints_exact_values_and_exports() {
    let dir = std::env::temp_dir().join("fockweight-cli-export");
    let _ = std::fs::remove_dir_all(&dir);
    let path = config_path(TWO_LOOP_GEOMETRIC);
    let out = run(&[
        "norms",
        path.to_str().unwrap(),
        "--path",
        "f",
        "--horizon",
        "6",
        "--export",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("left shift norm: 1 (exact)"), "{text}");
    assert!(text.contains("right shift norm: 32 (exact)"), "{text}");
    let exported = std::fs::read_to_string(dir.join("f.right.triplets")).unwrap();
    assert!(exported.starts_with("# fockweight sparse-operator v1"));
    assert!(exported.contains("scalar rational"));
}

#[test]
fn probe_and_tails_subcommands() {
    let path = config_path(TWO_LOOP_REPEAT);
    let out = run(&[
        "probe",
        path.to_str().unwrap(),
        "--cap",
        "2",
        "--horizon",
        "4",
        "--classify-horizon",
        "8",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));

    let out = run(&[
        "tails",
        path.to_str().unwrap(),
        "--cap",
        "2",
        "--horizon",
        "10",
        "--json",
        "-",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("fails_on_horizon"), "{text}");
}
