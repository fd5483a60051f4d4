use std::process::{Command, Output};

use serde_json::Value;
use trigsigma::cli::{run_eval, CommonArgs, CurveArgs, EvalOutput, Format, Function, IdentityCheck};
use trigsigma::numkernel::c;

fn trigsigma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trigsigma")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn periods_reports_legendre_defect() {
    let out = trigsigma(&["periods", "--b1", "2", "--b2", "3", "--s", "0.1"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["genus"], 3);
    assert!(v["diagnostics"]["legendre_defect"].as_f64().unwrap() < 1e-8);
}

#[test]
fn periods_at_zero_is_genus_two() {
    let v = json(&trigsigma(&["periods", "--s", "0"]));
    assert_eq!(v["genus"], 2);
    assert_eq!(v["tau"]["rows"], 2);
}

#[test]
fn coincident_branch_points_exit_two() {
    let out = trigsigma(&["periods", "--b1", "2", "--b2", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["error"], "InvalidParam");
    assert!(v["message"].as_str().unwrap().contains("coincident branch points"));
}

#[test]
fn empty_grid_exit_two() {
    let out = trigsigma(&["sweep", "--grid", ""]);
    assert_eq!(out.status.code(), Some(2));
    assert!(json(&out)["message"].as_str().unwrap().contains("empty grid"));
}

#[test]
fn elliptic_suite_passes() {
    let out = trigsigma(&["elliptic", "--s", "0.01"]);
    assert!(out.status.success());
    let v = json(&out);
    let rows: Vec<IdentityCheck> = serde_json::from_value(v["identities"].clone()).unwrap();
    assert!(rows.len() >= 15);
    assert!(rows.iter().all(|r| r.pass), "{rows:?}");
    assert!(v["context"]["g3"][0].as_f64().unwrap() < 0.0);
}

#[test]
fn verify_is_seed_deterministic() {
    let a = trigsigma(&["verify", "--suite", "sigma", "--seed", "3"]);
    let b = trigsigma(&["verify", "--suite", "sigma", "--seed", "3"]);
    let other = trigsigma(&["verify", "--suite", "sigma", "--seed", "4"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn verify_genus_two_csv() {
    let out = trigsigma(&["verify", "--s", "0", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("suite,identity,defect,tol,pass"));
    assert!(lines.all(|l| l.ends_with(",true")));
}

#[test]
fn sweep_csv_layout() {
    let out = trigsigma(&["sweep", "--grid", "1e-2,1e-3,1e-4", "--observable", "omega_p_13", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "s,observable,value_re,value_im,abs");
    assert_eq!(lines.iter().filter(|l| l.contains(",omega_p_13,")).count(), 3);
    let fit = lines.iter().find(|l| l.starts_with("# omega_p_13")).unwrap();
    let e: f64 = fit.split("fitted_exponent=").nth(1).unwrap().split(' ').next().unwrap().parse().unwrap();
    assert!((e + 1.0 / 3.0).abs() < 0.03);
}

#[test]
fn main_theorem_needs_points() {
    let out = trigsigma(&["sweep", "--main-theorem", "--grid", "1e-3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_json_round_trips() {
    let out = trigsigma(&["eval", "--u", "0.1,0.05;0.02,0;-0.03,0.01"]);
    assert!(out.status.success());
    let parsed: EvalOutput = serde_json::from_slice(&out.stdout).unwrap();
    let curve = CurveArgs { b1: c(2.0, 0.0), b2: c(3.0, 0.0), s: c(0.1, 0.0) };
    let common = CommonArgs { tol: None, order: 40, seed: 0, out: None, format: Format::Json };
    let direct = run_eval(&curve, &common, Function::Sigma, &parsed.u, 0, 0).unwrap();
    assert_eq!(parsed.value, direct.value);
    assert_eq!(parsed.u, vec![c(0.1, 0.05), c(0.02, 0.0), c(-0.03, 0.01)]);
    let again = serde_json::to_string_pretty(&parsed).unwrap() + "\n";
    assert_eq!(again.as_bytes(), out.stdout.as_slice());
}

#[test]
fn eval_checks_dimension() {
    let out = trigsigma(&["eval", "--u", "0.1,0"]);
    assert_eq!(out.status.code(), Some(2));
    let wp = json(&trigsigma(&["eval", "--function", "wp", "--s", "0.01", "--u", "0.3,0.1"]));
    assert!(wp["value"][0].as_f64().unwrap().is_finite());
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("trigsigma-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("periods.json");
    let out = trigsigma(&["periods", "--s", "0.05", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["genus"], 3);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn periods_json_round_trips() {
    let out = trigsigma(&["periods", "--s", "0.07"]);
    let pd: trigsigma::periods::PeriodData = serde_json::from_slice(&out.stdout).unwrap();
    let again = serde_json::to_string_pretty(&pd).unwrap() + "\n";
    assert_eq!(again.as_bytes(), out.stdout.as_slice());
}

#[test]
fn main_theorem_point_shorthand() {
    let a = trigsigma(&["sweep", "--main-theorem", "--point", "1.5", "2.5", "--grid", "1e-3,1e-4", "--format", "csv"]);
    let b = trigsigma(&["sweep", "--main-theorem", "--x1", "1.5", "--x2", "2.5", "--grid", "1e-3,1e-4", "--format", "csv"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# main_theorem modulus_limit=")));
}
