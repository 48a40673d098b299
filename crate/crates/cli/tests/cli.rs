use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn hyperdisc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperdisc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn gen_file(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let p = dir.join(name);
    let mut all = vec!["gen"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", p.to_str().unwrap()]);
    let o = hyperdisc(&all);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    p
}

/// Two Rademacher signs on the same scalar: opposite signs cancel.
const TOY: &str = r#"{
  "schema": "hyperdisc-instance/1",
  "kind": "kls",
  "kls": {
    "h": {"type": "determinant", "size": 1, "e": ["1"]},
    "vectors": [["1"], ["1"]],
    "variables": [
      {"support": ["-1", "1"], "probs": ["1/2", "1/2"]},
      {"support": ["-1", "1"], "probs": ["1/2", "1/2"]}
    ]
  }
}"#;

#[test]
fn gen_embeds_sigma_and_is_deterministic() {
    let a = hyperdisc(&["gen", "--kind", "kls-det", "--n", "4", "--mprime", "2", "--seed", "7"]);
    let b = hyperdisc(&["gen", "--kind", "kls-det", "--n", "4", "--mprime", "2", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["schema"], "hyperdisc-instance/1");
    assert_eq!(v["generator"]["seed"], 7);
    assert_eq!(v["kls"]["vectors"].as_array().unwrap().len(), 4);
    assert!(v["kls"]["sigma2"].as_f64().unwrap() > 0.0);
    let c = hyperdisc(&["gen", "--kind", "kls-det", "--n", "4", "--mprime", "2", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn gen_ust_k3_marginals() {
    let v = json(&hyperdisc(&["gen", "--kind", "sr-ust", "--graph", "k3"]));
    assert_eq!(v["sr"]["eps1"], "2/3");
    assert_eq!(v["sr"]["eps2"], "2/3");
    assert_eq!(v["sr"]["distribution"]["support"].as_array().unwrap().len(), 3);
}

#[test]
fn gen_rejects_bad_params() {
    let o = hyperdisc(&["gen", "--kind", "kls-det", "--n", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid parameters"));
    assert_eq!(hyperdisc(&["gen", "--kind", "sr-ust"]).status.code(), Some(1));
    assert_eq!(hyperdisc(&["gen", "--kind", "nope"]).status.code(), Some(1));
}

#[test]
fn float_backend_files_solve() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen_file(dir.path(), "f.json", &["--kind", "kls-lorentz", "--n", "3", "--m", "3", "--backend", "float"]);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&f).unwrap()).unwrap();
    assert!(v["kls"]["vectors"][0][0].is_number());
    let o = hyperdisc(&["solve", f.to_str().unwrap(), "--backend", "float"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["backend"], "float");
}

#[test]
fn solve_toy_brute_and_blocked() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "toy.json", TOY);
    let o = hyperdisc(&["solve", f.to_str().unwrap(), "--method", "brute"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["certified"].as_f64().unwrap(), 0.0);
    assert_ne!(v["labels"][0], v["labels"][1]);

    let o = hyperdisc(&["solve", f.to_str().unwrap(), "--method", "blocked", "--delta", "0.5"]);
    assert!(o.status.success());
    let v = json(&o);
    let root = v["root_max_root"].as_f64().unwrap();
    assert!(v["certified"].as_f64().unwrap() <= 1.5 * root + 1e-12);
    assert_eq!(v["status"], "certified");
}

#[test]
fn solve_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"schema\": \"hyperdisc-instance/1\", \"kind\": ");
    let o = hyperdisc(&["solve", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("parse error"));

    // With k = 2 and one round the score can prefer a leaf above the root bound.
    let f = gen_file(dir.path(), "f.json", &["--kind", "kls-det", "--n", "3", "--mprime", "2", "--seed", "433"]);
    let o = hyperdisc(&["solve", f.to_str().unwrap(), "--block", "3", "--k", "2", "--delta", "1e-9"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["status"], "certification-failed");
}

#[test]
fn verify_fixture_suites() {
    for suite in ["identities", "barrier", "marginals"] {
        let o = hyperdisc(&["verify", "--suite", suite]);
        let v = json(&o);
        assert_eq!(o.status.code(), Some(0), "{suite}: {v}");
        assert_eq!(v["passed"], true);
        assert!(v["checks"].as_u64().unwrap() > 0);
    }
    let o = hyperdisc(&["verify"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(hyperdisc(&["verify", "--suite", ""]).status.code(), Some(1));
}

#[test]
fn verify_barrier_guards_precondition() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen_file(dir.path(), "big.json", &["--kind", "kls-det", "--n", "5", "--mprime", "2", "--seed", "3"]);
    let o = hyperdisc(&["verify", f.to_str().unwrap(), "--suite", "barrier"]);
    assert_ne!(o.status.code(), Some(0));
    let v = json(&o);
    assert!(v["results"][0]["name"].as_str().unwrap().ends_with("/precondition"));
    let o = hyperdisc(&["verify", f.to_str().unwrap(), "--suite", "barrier", "--normalize"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn verify_file_runs_all_applicable_suites() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen_file(dir.path(), "k4.json", &["--kind", "sr-ust", "--graph", "k4"]);
    let o = hyperdisc(&["verify", f.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    for suite in ["identities,", "barrier,", "marginals,"] {
        assert!(text.lines().any(|l| l.starts_with(suite)), "{suite} missing");
    }
}

#[test]
fn bench_rows_respect_bound_and_repeat() {
    let args = ["bench", "--kind", "kls-det", "--n", "5", "--mprime", "2", "--count", "20", "--trials", "20", "--format", "csv"];
    let a = hyperdisc(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, hyperdisc(&args).stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let within = header.iter().position(|&c| c == "within_bound").unwrap();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r.split(',').nth(within) == Some("true")));
}

#[test]
fn bench_single_row_without_baseline() {
    let o = hyperdisc(&["bench", "--kind", "sr-ust", "--graph", "diamond", "--trials", "0"]);
    assert!(o.status.success());
    let v = json(&o);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0]["baseline_median"].is_null());
    assert!(rows[0]["brute"].as_f64().unwrap() <= rows[0]["bound"].as_f64().unwrap());
    let cols: Vec<&str> = v["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    let keys: Vec<&str> = rows[0].as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(cols, keys);
}
