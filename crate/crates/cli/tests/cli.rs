use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn negent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_negent"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn write_state(dir: &Path, name: &str, re: [[f64; 4]; 4]) -> String {
    let path = dir.join(name);
    let body = serde_json::json!({ "dims": [2, 2], "re": re });
    std::fs::write(&path, body.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

fn close(v: &Value, x: f64) -> bool {
    (v.as_f64().unwrap() - x).abs() < 1e-12
}

#[test]
fn compute_maximally_mixed() {
    let dir = TempDir::new().unwrap();
    let q = 0.25;
    let state = write_state(dir.path(), "mixed.json", [[q, 0.0, 0.0, 0.0], [0.0, q, 0.0, 0.0], [0.0, 0.0, q, 0.0], [0.0, 0.0, 0.0, q]]);
    let out = negent(&["compute", "--state", &state]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert!(close(&r["lambda"], -0.5));
    assert!(close(&r["concurrence"], 0.0));
    assert!(close(&r["nem"], -0.5));
    assert_eq!(r["ess"], Value::Bool(false));
}

#[test]
fn compute_bell_state_is_a_domain_error() {
    let dir = TempDir::new().unwrap();
    let h = 0.5;
    let state = write_state(dir.path(), "bell.json", [[h, 0.0, 0.0, h], [0.0; 4], [0.0; 4], [h, 0.0, 0.0, h]]);
    let out = negent(&["compute", "--state", &state]);
    assert_eq!(out.status.code(), Some(2));
    let r = json(&out);
    assert!(close(&r["lambda"], 1.0));
    assert!(close(&r["concurrence"], 1.0));
    assert!(r["nem"].is_null());
    assert!(r["ess"].is_null());
}

#[test]
fn compute_edge_state() {
    let dir = TempDir::new().unwrap();
    let state = write_state(dir.path(), "ess.json", [[0.5, 0.0, 0.0, 0.0], [0.0, 0.5, 0.0, 0.0], [0.0; 4], [0.0; 4]]);
    let report = dir.path().join("report.json");
    let out = negent(&["compute", "--state", &state, "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert!(close(&r["nem"], 0.0));
    assert_eq!(r["ess"], Value::Bool(true));
    assert_eq!(std::fs::read(&report).unwrap(), out.stdout);
}

#[test]
fn compute_rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{ not json").unwrap();
    assert_eq!(negent(&["compute", "--state", garbage.to_str().unwrap()]).status.code(), Some(1));

    let unnormalized = write_state(dir.path(), "trace.json", [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0; 4], [0.0; 4]]);
    assert_eq!(negent(&["compute", "--state", &unnormalized]).status.code(), Some(1));

    let missing = dir.path().join("missing.json");
    assert_eq!(negent(&["compute", "--state", missing.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn ising_sweep_default_grid() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = negent(&[
        "ising-sweep", "--lambda-min", "0", "--lambda-max", "2", "--steps", "201", "--r", "3", "--h", "1e-3",
        "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let summary = json(&out);
    assert_eq!(summary["rows"], 201);
    assert!((summary["extremum_lambda"].as_f64().unwrap() - 1.0).abs() <= 0.05);
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 202);
    assert_eq!(lines[0], "lambda,r,nem,dnem_dlambda,mz,xx,yy,zz");
    // No temporary files left behind.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn ising_sweep_single_point() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("one.csv");
    let out = negent(&[
        "ising-sweep", "--lambda-min", "0", "--lambda-max", "0", "--steps", "1", "--r", "3", "--h", "1e-3",
        "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].split(',').nth(2), Some("0"));
}

#[test]
fn ising_sweep_nearest_neighbours_are_entangled() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("r1.csv");
    let out = negent(&["ising-sweep", "--r", "1", "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let report = json(&out);
    assert_eq!(report["error"], "entangled_rdm");
    assert!(report["concurrence"].as_f64().unwrap() > 0.0);
    assert!(!csv.exists());
}

#[test]
fn ising_sweep_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = negent(&["ising-sweep", "--steps", "41", "--r", "4", "--out", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn oracle_check_product_sample() {
    let out = negent(&["oracle-check", "--trials", "1", "--seed", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["results"][0]["k"], 1);
    assert!(r["max_gap"].as_f64().unwrap() <= 1e-4);
}

#[test]
fn oracle_check_agrees_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("cfg.json");
    std::fs::write(&config, r#"{"restarts": 20, "seed": 3}"#).unwrap();
    let args = ["oracle-check", "--trials", "16", "--seed", "11", "--config", config.to_str().unwrap()];
    let first = negent(&args);
    let second = negent(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let r = json(&first);
    assert!(r["max_gap"].as_f64().unwrap() <= 1e-2);
    assert_eq!(r["config"]["restarts"], 20);
    assert_eq!(r["config"]["max_iters"], 2000);
}

#[test]
fn oracle_check_rejects_bad_config() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("cfg.json");
    std::fs::write(&config, r#"{"feasibility_delta": -1.0}"#).unwrap();
    let out = negent(&["oracle-check", "--trials", "1", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(negent(&["oracle-check", "--trials", "0"]).status.code(), Some(1));
}

#[test]
fn isotropic_report() {
    let out = negent(&["isotropic", "--d", "2", "--F", "0.3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert!(close(&r["nem_lower_bound"], -0.4));
    assert!((r["exact_lambda"].as_f64().unwrap() + 0.4).abs() < 1e-10);

    let out = negent(&["isotropic", "--d", "3", "--F", "1"]);
    let r = json(&out);
    assert!((r["i_concurrence"].as_f64().unwrap() - (4.0f64 / 3.0).sqrt()).abs() < 1e-12);
    assert!(r["nem_lower_bound"].is_null());
    assert!(r["exact_lambda"].is_null());

    assert_eq!(negent(&["isotropic", "--d", "1", "--F", "0.5"]).status.code(), Some(1));
}

#[test]
fn selftest_subset() {
    let out = negent(&["selftest", "--criterion", "1", "--criterion", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("[PASS] 1 "));
    assert!(lines[1].starts_with("[PASS] 7 "));
    assert_eq!(negent(&["selftest", "--criterion", "12"]).status.code(), Some(1));
}
