use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_morse-sturm");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn emit(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).display().to_string();
    let mut full = vec!["example"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--emit", &path]);
    assert_eq!(run(&full).status.code(), Some(0));
    path
}

/// `R = [[3t^4/2, -3t], [3t, 0]]`, `Y = (1, t^3/2)`: `Y'(0) = 0` while `m(Y)` is not identically zero.
const GENERIC_Y: &str = r#"{
  "n": 2,
  "g": [[-1, 0], [0, 1]],
  "R": {"kind": "polynomial", "coeffs": [[[0, 0], [0, 0]], [[0, -3], [3, 0]], [[0, 0], [0, 0]], [[0, 0], [0, 0]], [[1.5, 0], [0, 0]]]},
  "Y": {"kind": "polynomial", "coeffs": [[1, 0], [0, 0], [0, 0], [0, 0.5]]},
  "P": [],
  "S_P": []
}"#;

#[test]
fn sphere_verifies_with_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let p = emit(dir.path(), "p.json", &["static-sphere", "--k", "22.207"]);
    let out = run(&["verify", "--problem", &p, "--grid", "50", "--mesh", "128"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["index_theorem"]["lhs"], 1);
    assert_eq!(v["index_theorem"]["rhs"], 1);
    assert_eq!(v["all_pass"], true);
}

#[test]
fn flat_index_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let p = emit(dir.path(), "flat.json", &["flat"]);
    let out = run(&["index", "--problem", &p, "--sigma", "1.0", "--mesh", "64", "--space", "h0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!((v["n_minus"].as_u64(), v["nullity"].as_u64()), (Some(0), Some(0)));
    let out = run(&["validate", "--problem", &p]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["regime"], "singular");
    let out = run(&["focal", "--problem", &p, "--tlo", "1e-3"]);
    assert_eq!(json(&out)["instants"].as_array().unwrap().len(), 0);
    let out = run(&["pseudo-focal", "--problem", &p]);
    assert_eq!(json(&out)["kind"], "pseudo_focal");
}

#[test]
fn generic_y_is_a_regime_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("generic.json");
    std::fs::write(&p, GENERIC_Y).unwrap();
    let p = p.display().to_string();
    let v = json(&run(&["validate", "--problem", &p]));
    assert_eq!(v["valid"], true);
    assert_eq!(v["regime"], "none");
    assert_eq!(run(&["verify", "--problem", &p, "--grid", "5", "--mesh", "16"]).status.code(), Some(3));
    assert_eq!(run(&["pseudo-focal", "--problem", &p]).status.code(), Some(3));
}

#[test]
fn scan_writes_csv_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let p = emit(dir.path(), "a.json", &["flat-admissible"]);
    let csv = dir.path().join("scan.csv").display().to_string();
    let first = run(&["scan", "--problem", &p, "--grid", "6", "--mesh", "16", "--out", &csv]);
    assert_eq!(first.status.code(), Some(0));
    let table = std::fs::read_to_string(&csv).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("sigma,mu,mu0,nullity0"));
    assert_eq!(lines.count(), 6);
    let second = run(&["scan", "--problem", &p, "--grid", "6", "--mesh", "16", "--out", &csv]);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(table, std::fs::read_to_string(&csv).unwrap());
}

#[test]
fn random_example_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = emit(dir.path(), "a.json", &["random", "--seed", "3"]);
    let b = emit(dir.path(), "b.json", &["random", "--seed", "3"]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["index", "--problem", "x.json", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(&["validate", "--problem", "/does/not/exist.json"]).status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"n": 2, "g": [[1, 0], [0, 1]]}"#).unwrap();
    assert_eq!(run(&["validate", "--problem", &bad.display().to_string()]).status.code(), Some(2));
    let p = emit(dir.path(), "s.json", &["static-sphere"]);
    assert_eq!(run(&["index", "--problem", &p, "--sigma", "1.5"]).status.code(), Some(2));
}
