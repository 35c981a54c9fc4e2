use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fga(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fga")).args(args).output().expect("spawn fga")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr is JSON")
}

fn write_instance(dir: &Path) -> String {
    let out = fga(&["gen", "--flights", "3", "--gates", "2", "--seed", "4"]);
    assert!(out.status.success());
    let path = dir.join("inst.json");
    fs::write(&path, &out.stdout).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn gen_is_deterministic() {
    let a = fga(&["gen", "--flights", "4", "--gates", "3", "--seed", "9"]);
    let b = fga(&["gen", "--flights", "4", "--gates", "3", "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
    let inst = stdout_json(&a);
    assert_eq!(inst["num_flights"], 4);
    assert_eq!(inst["num_gates"], 3);

    let dir = tempfile::tempdir().unwrap();
    let out = fga(&["gen", "--flights", "2", "--gates", "2", "--count", "3", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    for k in 0..3 {
        assert!(dir.path().join(format!("instance_{k}.json")).exists());
    }
}

#[test]
fn exact_encode_and_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path());

    let exact = stdout_json(&fga(&["exact", &inst]));
    assert!(exact["optimal_time"].as_f64().unwrap() >= 0.0);
    assert!(!exact["optima"].as_array().unwrap().is_empty());

    let binary = stdout_json(&fga(&["encode", &inst, "--encoding", "binary"]));
    assert_eq!(binary["num_qubits"], 3);
    let one_hot = stdout_json(&fga(&["encode", &inst, "--encoding", "one_hot"]));
    assert_eq!(one_hot["num_qubits"], 6);

    let ratio = stdout_json(&fga(&["ratio", &inst]));
    assert!(ratio["binary"].as_f64().unwrap() >= ratio["one_hot"].as_f64().unwrap());
    assert_eq!(ratio["one_hot_constraint_only"].as_f64().unwrap(), 8.0 / 64.0);
}

#[test]
fn vqe_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path());
    let out_dir = dir.path().join("run");
    let args = ["vqe", &inst, "--seed", "3", "--out", out_dir.to_str().unwrap()];
    let result = stdout_json(&fga(&args));
    assert_eq!(result["n_qubits"], 3);
    let trace = fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    assert!(trace.starts_with("eval,cost,fidelity\n"));
    assert!(trace.lines().count() - 1 <= 150);
    assert!(out_dir.join("summary.json").exists());
    assert_eq!(fga(&args).stdout, fga(&args).stdout);
}

#[test]
fn sweep_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.json");
    fs::write(
        &config,
        r#"{"sizes": [[2, 2], [3, 2]], "instances_per_size": 2, "restarts_per_instance": 2, "xis": [0.1], "layer_counts": [1]}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let summary = stdout_json(&fga(&["sweep", config.to_str().unwrap(), "--out", out.to_str().unwrap()]));
    assert_eq!(summary["runs"], 8);
    assert_eq!(summary["failed_runs"], 0);
    for file in ["records.jsonl", "runs.csv", "summary.csv", "scaling.csv", "manifest.json"] {
        assert!(out.join(file).exists(), "{file} missing");
    }
    let before = fs::read(out.join("summary.csv")).unwrap();
    let again = dir.path().join("again");
    stdout_json(&fga(&["report", out.to_str().unwrap(), "--out", again.to_str().unwrap()]));
    assert_eq!(before, fs::read(again.join("summary.csv")).unwrap());
}

#[test]
fn errors_are_json() {
    let out = fga(&["exact", "/nonexistent/instance.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_json(&out)["error"].is_string());

    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path());
    let out = fga(&["vqe", &inst, "--xi", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_json(&out)["message"].as_str().unwrap().contains("xi"));

    let out = fga(&["encode", &inst, "--encoding", "gray"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "unknown_strategy");

    let out = fga(&["gen", "--flights", "x"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "usage");

    assert_eq!(fga(&["--help"]).status.code(), Some(0));
}
