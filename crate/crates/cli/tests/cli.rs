use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn ctilde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctilde")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ctilde-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn json(path: &PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_passes_and_writes_report() {
    let dir = scratch("verify");
    let report = dir.join("r.json");
    let out = ctilde(&["verify", "matchmaker", "--seed", "3", "--report", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&report);
    assert_eq!(r["suite"], "matchmaker");
    assert_eq!(r["seed"], 3);
    assert!(r.get("wall_time_ms").is_none());
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn reports_are_byte_identical() {
    let run = || ctilde(&["verify", "baxter", "--n", "2", "--seed", "7"]).stdout;
    let a = run();
    assert!(!a.is_empty());
    assert_eq!(a, run());
}

#[test]
fn impossible_tolerance_fails_with_exit_one() {
    let out = ctilde(&["verify", "algebra", "--n", "2", "--tolerance", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
}

#[test]
fn invalid_input_exits_two() {
    assert_eq!(ctilde(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(ctilde(&["verify", "algebra", "--n", "0"]).status.code(), Some(2));
    assert_eq!(ctilde(&["koornwinder", "compute", "--lambda", "1,x"]).status.code(), Some(2));
    assert_eq!(ctilde(&["qkz", "build", "--n", "2"]).status.code(), Some(2));
}

#[test]
fn unconstrained_qkz_build_is_refused() {
    let out = ctilde(&["qkz", "build", "--n", "2", "--m", "1", "--seed", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("\"satisfied\": false"), "{err}");
}

#[test]
fn constrained_qkz_build_round_trips_through_verify() {
    let dir = scratch("qkz");
    let sol = dir.join("sol.json");
    let out = ctilde(&["qkz", "build", "--n", "2", "--m", "-1", "--constrain", "--seed", "4", "--out", sol.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&sol)["metadata"]["m"], -1);
    let report = dir.join("r.json");
    let out = ctilde(&["qkz", "verify", "--in", sol.to_str().unwrap(), "--report", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&report)["suite"], "qkz.verify");
}

#[test]
fn koornwinder_compute_is_monic() {
    let out = ctilde(&["koornwinder", "compute", "--lambda", "1,-1", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let lead = v["poly"]["terms"].as_array().unwrap().iter().find(|t| t["exp"] == serde_json::json!([1, -1])).expect("leading term");
    assert_eq!((lead["re"].as_f64(), lead["im"].as_f64()), (Some(1.0), Some(0.0)));
    assert!(v["eigen_residual"].as_f64().unwrap() < 1e-8);
    let mismatch = ctilde(&["koornwinder", "compute", "--lambda", "1,-1", "--n", "3"]);
    assert_eq!(mismatch.status.code(), Some(2));
}

#[test]
fn emit_tables_writes_manifest() {
    let dir = scratch("emit");
    let out = ctilde(&["emit", "tables", "koornwinder", "hamiltonian_spectrum", "--degree", "1", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let files: Vec<String> = serde_json::from_value(json(&dir.join("manifest.json"))["files"].clone()).unwrap();
    assert_eq!(files.len(), 4);
    for f in &files {
        assert!(dir.join(f).exists(), "{f}");
    }
    let table = json(&dir.join("hamiltonian_spectrum_n2.json"));
    for d in table["pairwise_distance"].as_array().unwrap() {
        assert!(d["distance"].as_f64().unwrap() < 1e-7);
    }
}

#[test]
fn emit_without_kinds_gives_empty_manifest() {
    let dir = scratch("empty");
    let out = ctilde(&["emit", "tables", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&dir.join("manifest.json"))["files"].as_array().unwrap().len(), 0);
}

#[test]
fn flags_take_precedence_over_config_file() {
    let dir = scratch("config");
    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, r#"{"n": 2, "seed": 11}"#).unwrap();
    let from_file: Value = serde_json::from_slice(&ctilde(&["verify", "matchmaker", "--config", cfg.to_str().unwrap()]).stdout).unwrap();
    assert_eq!(from_file["seed"], 11);
    let flagged: Value = serde_json::from_slice(&ctilde(&["verify", "matchmaker", "--config", cfg.to_str().unwrap(), "--seed", "12"]).stdout).unwrap();
    assert_eq!(flagged["seed"], 12);
    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    assert_eq!(ctilde(&["verify", "matchmaker", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn timing_is_opt_in() {
    let out = ctilde(&["verify", "matchmaker", "--n", "2", "--timing"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["wall_time_ms"].is_u64());
}
