//! End-to-end tests of the `sj` binary.

use std::process::{Command, Output};

fn sj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sj")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

#[test]
fn distance_prints_log_two() {
    let o = sj(&["distance", "--p0", r#"{"Omega":[[[0,1]]]}"#, "--p1", r#"{"Omega":[[[0,2]]]}"#]);
    assert_eq!(o.status.code(), Some(0));
    let d: f64 = stdout(&o).trim().parse().unwrap();
    assert!((d - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn distance_emits_eigenvalue_table() {
    let o = sj(&["distance", "--p0", r#"{"Omega":[[[0,1]]]}"#, "--p1", r#"{"Omega":[[[0,2]]]}"#, "--emit-eigs"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("k,r_k"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!((row[1].parse::<f64>().unwrap() - 1.0 / 9.0).abs() < 1e-12);
}

#[test]
fn theta_base_value() {
    let o = sj(&["theta", "--M", "1", "--tau", "0,1", "--phi", "0", "--lam", "0", "--mu", "0", "--kappa", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let lattice: f64 = (-30i32..=30).map(|w| (-std::f64::consts::PI * (w * w) as f64).exp()).sum();
    assert!((v["value"][0].as_f64().unwrap() - lattice).abs() < 1e-10);
    assert!(v["value"][1].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn reduce_reduced_point_gives_identity() {
    let o = sj(&["reduce", "--space", "hn", "--point", r#"{"Omega":[[[0.1,1.5]]]}"#]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["certificate"].is_object());
    let out = stdout(&o);
    assert!(out.contains("0.1") && out.contains("1.5"));
}

#[test]
fn check_writes_csv_and_is_deterministic() {
    let a = sj(&["--seed", "5", "check", "--suite", "distance"]);
    let b = sj(&["--seed", "5", "check", "--suite", "distance"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    assert!(out.starts_with("case,lhs,rhs,residual,tol,pass\n"));
    assert!(out.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    assert_eq!(sj(&["check", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn malformed_point_is_a_usage_error() {
    assert_eq!(sj(&["distance", "--p0", "{", "--p1", "{}"]).status.code(), Some(2));
    assert_eq!(sj(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_one() {
    let o = sj(&["theta", "--M", "1", "--tau", "0,1e-9", "--phi", "0", "--lam", "0", "--mu", "0", "--kappa", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = sj(&[
        "laplacian",
        "--space",
        "hnm",
        "--A",
        "1",
        "--B",
        "1",
        "--field",
        "bessel",
        "--point",
        r#"{"Omega":[[[0,1]]],"Z":[[[0,1e300]]]}"#,
    ]);
    assert_eq!(o.status.code(), Some(1));
}
