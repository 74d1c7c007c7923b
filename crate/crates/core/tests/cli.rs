use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_clifford-hull");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("CLIFFORD_HULL_THREADS").output().expect("binary runs")
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (Output, Vec<u8>) {
    let out = dir.join(name);
    let mut full = args.to_vec();
    let path = out.to_str().unwrap();
    full.extend(["--out", path]);
    let o = run(&full);
    let body = std::fs::read(&out).unwrap_or_default();
    (o, body)
}

#[test]
fn simulate_csv_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--lambda", "1.5", "--trials", "60", "--seed", "17", "--format", "csv"];
    let (a, body_a) = run_to(dir.path(), "a.csv", &args);
    let (b, body_b) = run_to(dir.path(), "b.csv", &[&args[..], &["--threads", "3"]].concat());
    assert!(a.status.success() && b.status.success());
    assert_eq!(body_a, body_b);
    let text = String::from_utf8(body_a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "trial,seed,lambda,n_points,f0,f1,f2,f3,vbar,euler_residual,r1_residual,r2_residual,degenerate"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 60);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0], i.to_string());
        assert_eq!(r[3], r[4], "f0 = n_points");
        if r[12] == "false" {
            let f: Vec<i64> = r[4..8].iter().map(|x| x.parse().unwrap()).collect();
            assert_eq!(f[1], f[0] + f[3]);
            assert_eq!(f[2], 2 * f[3]);
            assert_eq!(r[9..12], ["0", "0", "0"]);
        }
    }
    assert!(dir.path().join("a.summary.json").exists());
    assert!(dir.path().join("a.meta.json").exists());
}

#[test]
fn json_output_is_reproducible_and_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["caps", "--samples", "5000", "--seed", "2"];
    let (a, body_a) = run_to(dir.path(), "a.json", &args);
    let (_, body_b) = run_to(dir.path(), "b.json", &args);
    assert!(a.status.success());
    assert_eq!(body_a, body_b);
    let v: serde_json::Value = serde_json::from_slice(&body_a).unwrap();
    assert_eq!(v["mode"], "caps");
    assert_eq!(v["config"]["samples"], 5000);
    assert_eq!(v["result"]["violations"], 0);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"mode": "simulate", "lambda": 1.0, "trials": 5, "master_seed": 1}"#).unwrap();
    let (o, body) = run_to(dir.path(), "r.json", &["simulate", "--config", cfg.to_str().unwrap(), "--trials", "7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["result"]["trials"].as_array().unwrap().len(), 7);
    assert_eq!(v["config"]["master_seed"], 1);
}

#[test]
fn config_errors_exit_one() {
    for args in [
        &["simulate", "--lambda", "1", "--trials", "0"][..],
        &["simulate", "--trials", "3"],
        &["simulate", "--lambda", "-2"],
        &["regress", "--lambdas", "1,2,4"],
        &["caps", "--format", "xml"],
        &["simulate", "--config", "/nonexistent/cfg.json"],
        &["no-such-mode"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"mode": "caps", "sampels": 10}"#).unwrap();
    assert_eq!(run(&["caps", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn measure_fit_csv_writes_plot_files() {
    let dir = tempfile::tempdir().unwrap();
    let (o, body) =
        run_to(dir.path(), "m.json", &["measure-fit", "--samples", "20000", "--format", "csv", "--bins", "8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["result"]["split_identity"], true);
    // too few samples to reach the hit floor at the smallest threshold
    assert!(v["result"]["fit_error"].is_string());
    for suffix in ["_m.dat", "_n.dat", "_l.dat", "_law.dat"] {
        let dat = std::fs::read_to_string(dir.path().join(format!("m{suffix}"))).unwrap();
        assert_eq!(dat.lines().count(), 9);
    }
}

#[test]
fn jacobian_check_passes() {
    let o = run(&["jacobian-check", "--samples", "200"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["failures"], 0);
    assert_eq!(v["result"]["reference_signed_sum"], 4.0);
}
