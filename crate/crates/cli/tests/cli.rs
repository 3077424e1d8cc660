use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const XOR: &str = "label,x0,x1\n1,1,1\n1,-1,-1\n-1,1,-1\n-1,-1,1\n";
const LINE: &str = "label,x0,x1\n1,2,0.5\n1,1.5,-0.4\n-1,-1,0.2\n-1,-2,-0.3\n";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relu-sep"))
        .args(args)
        .env("RELUSEP_THREADS", "2")
        .output()
        .unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn sepcheck_reports_both_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let xor = write(dir.path(), "xor.csv", XOR);
    let line = write(dir.path(), "line.csv", LINE);
    assert!(json(&["sepcheck", &xor]).to_string().contains("not_separated"));
    let sep = json(&["sepcheck", &line]).to_string();
    assert!(!sep.contains("not_separated") && sep.contains("separated"), "{sep}");
}

#[test]
fn detsep_and_cover_verify() {
    let dir = tempfile::tempdir().unwrap();
    let xor = write(dir.path(), "xor.csv", XOR);
    for cmd in ["detsep", "cover"] {
        let v = json(&[cmd, &xor]).to_string();
        assert!(v.contains("\"passed\":true"), "{cmd}: {v}");
    }
}

#[test]
fn bounds_prints_widths() {
    let dir = tempfile::tempdir().unwrap();
    let xor = write(dir.path(), "xor.csv", XOR);
    let v = json(&["bounds", &xor, "--width-samples", "200"]);
    assert!(v.is_object());
}

#[test]
fn mc_verify_cap_matches_seed() {
    let args = ["mc-verify", "cap", "--d", "4", "--r", "0.8", "--trials", "5000", "--seed", "3"];
    let a = json(&args);
    assert_eq!(a, json(&args));
    assert_eq!(a["consistent_with_bound"], Value::Bool(true));
    let exact = a["exact"].as_f64().unwrap();
    assert!(a["estimate"]["ci_low"].as_f64().unwrap() <= exact && exact <= a["estimate"]["ci_high"].as_f64().unwrap());
}

#[test]
fn experiment_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = run(&[
        "experiment",
        "rings",
        "--widths",
        "20",
        "--lambdas",
        "100,360",
        "--trials",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
    let svg = fs::read_to_string(out.join("plot.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
    let _: Value = serde_json::from_str(&fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.csv", "x,y\n1,2\n");
    let o = run(&["sepcheck", &bad]);
    assert!(!o.status.success());
    assert!(!String::from_utf8_lossy(&o.stderr).contains("panicked"));
    assert!(!run(&["sepcheck", "/nonexistent.csv"]).status.success());
}
