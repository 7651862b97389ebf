use std::process::{Command, Output};

use philab_core::quiver::Algebra;
use philab_core::repmod::{Module, ModuleJson};
use philab_core::Field;
use serde_json::Value;

fn philab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_philab"))
        .args(args)
        .env_remove("PHILAB_PRIME")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = philab(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn phi_examples() {
    assert_eq!(json(&["phi", "--algebra", "A3CT", "--module", "S1"])["phi"], 0);
    assert_eq!(json(&["phi", "--algebra", "A", "--module", "S3+S4"])["phi"], 1);
    assert_eq!(json(&["phi", "--algebra", "A", "--module", "P1"])["phi"], 0);
    let r = json(&["phi", "--module", "S3+S4", "--cutoff", "8"]);
    assert_eq!(r["psi"]["Exact"], 1);
}

#[test]
fn syzygy_examples() {
    let r = json(&["syzygy", "--algebra", "A", "--module", "S2", "--t", "1"]);
    let names: Vec<&str> = r["summands"].as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["S3", "S4"]);
    let r = json(&["syzygy", "--algebra", "A", "--module", "P2", "--t", "1"]);
    assert!(r["summands"].as_array().unwrap().is_empty());
    let r = json(&["syzygy", "--family", "X1", "--t", "3", "--periodic"]);
    assert_eq!(r["count"], 2);
}

#[test]
fn counterexample_range_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = philab(&["counterexample", "--k", "1..2", "--format", "json", "--seed", "4", "--out", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let reports: Value = serde_json::from_slice(&bytes).unwrap();
    let bounds: Vec<u64> = reports
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["phi_lower_bound"].as_u64().unwrap())
        .collect();
    assert_eq!(bounds, [3, 6]);
    // Only the report itself is left behind.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn exact_phi_is_reported() {
    let r = json(&["counterexample", "--k", "1", "--exact-phi"]);
    assert_eq!(r[0]["exact_phi"], 4);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| philab(args).status.code();
    assert_eq!(code(&["counterexample", "--k", "0"]), Some(2));
    assert_eq!(code(&["phi", "--module", "Q1"]), Some(2));
    assert_eq!(code(&["phi", "--algebra", "B", "--module", "S1"]), Some(2));
    assert_eq!(code(&["phi", "--module", "S1", "--prime", "10"]), Some(2));
    assert_eq!(code(&["syzygy", "--family", "W3"]), Some(2));
    assert_eq!(code(&["bogus"]), Some(2));
}

#[test]
fn no_file_on_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let res = philab(&["counterexample", "--k", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn prime_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_philab"))
        .args(["phi", "--module", "S3+S4", "--format", "json"])
        .env("PHILAB_PRIME", "101")
        .output()
        .unwrap();
    assert!(out.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_philab"))
        .args(["phi", "--module", "S1"])
        .env("PHILAB_PRIME", "100")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn registry_journal_persists() {
    let dir = tempfile::tempdir().unwrap();
    let reg = dir.path().join("classes.jsonl");
    let first = json(&["phi", "--module", "S2", "--registry", reg.to_str().unwrap()]);
    let lines = std::fs::read_to_string(&reg).unwrap().lines().count();
    assert!(lines >= 4);
    let second = json(&["phi", "--module", "S2", "--registry", reg.to_str().unwrap()]);
    assert_eq!(first, second);
    assert_eq!(std::fs::read_to_string(&reg).unwrap().lines().count(), lines);
}

#[test]
fn module_from_json_file() {
    let dir = tempfile::tempdir().unwrap();
    let lit = json(&["phi", "--module", "S3+S4"]);
    let a = Algebra::builtin("A", Field::default()).unwrap();
    let m = Module::direct_sum(&[&Module::simple(&a, 2), &Module::simple(&a, 3)]).unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(&path, serde_json::to_string(&ModuleJson::from_module(&m)).unwrap()).unwrap();
    let from_file = json(&["phi", "--module", path.to_str().unwrap()]);
    assert_eq!(from_file["phi"], lit["phi"]);
    assert_eq!(from_file["ranks"], lit["ranks"]);
}
