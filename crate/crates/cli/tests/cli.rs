use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn pairform(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pairform"))
        .args(args)
        .env_remove("PAIRFORM_VERIFY_TOL")
        .env_remove("PAIRFORM_RANK_TOL")
        .env_remove("PAIRFORM_CLUSTER_TOL")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p.display().to_string()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn sip_nonreal_pair() -> Value {
    // C = [[0, i], [1, 0]]; C conj(C) = diag(i, −i).
    json!({"n": 2, "H": [[[0.0, 0.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]],
           "C": [[[0.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 0.0]]]})
}

#[test]
fn validate_names_self_adjointness() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "p.json", &json!({"n": 2,
        "H": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]],
        "C": [[[0.0, 0.0], [-1.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]]}));
    let o = pairform(&["validate", "--input", &f]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout_json(&o);
    assert_eq!(out["valid"], json!(false));
    assert!(out["violation"].as_str().unwrap().contains("self-adjointness"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("self-adjointness"));
}

#[test]
fn validate_accepts_a_pair() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "p.json", &sip_nonreal_pair());
    let o = pairform(&["validate", "--input", &f]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["valid"], json!(true));
}

#[test]
fn canonicalize_nonreal_scalar_block() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "p.json", &sip_nonreal_pair());
    let o = pairform(&["canonicalize", "--input", &f]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let form = stdout_json(&o);
    let blocks = form["blocks"].as_array().unwrap();
    assert_eq!(blocks.len(), 1);
    let fam = blocks[0]["family"].as_str().unwrap();
    assert!(fam == "nonreal" || fam == "negative", "{fam}");
    assert!(form["residuals"]["h_residual"].as_f64().unwrap() < 1e-6);
    assert!(form["residuals"]["c_residual"].as_f64().unwrap() < 1e-6);
    assert_eq!(form["M"].as_array().unwrap().len(), 2);
}

#[test]
fn generate_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = pairform(&["generate", "--size", "4", "--seed", "7", "--output", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn generate_canonicalize_verify_pipeline() {
    let dir = TempDir::new().unwrap();
    for seed in ["1", "7", "42", "2024"] {
        let pair = dir.path().join(format!("pair{seed}.json"));
        let pair = pair.to_str().unwrap();
        assert_eq!(pairform(&["generate", "--size", "6", "--seed", seed, "-o", pair]).status.code(), Some(0));
        let doc: Value = serde_json::from_slice(&std::fs::read(pair).unwrap()).unwrap();
        let singular = doc["truth"].as_array().unwrap().iter().any(|b| b["family"] == json!("zero"));
        for form in ["standard", "alt", "operator", "glr"] {
            if form == "glr" && singular {
                continue;
            }
            let out = dir.path().join(format!("{form}{seed}.json"));
            let out = out.to_str().unwrap();
            let o = pairform(&["canonicalize", "--input", pair, "--form", form, "-o", out]);
            let stderr = String::from_utf8_lossy(&o.stderr).to_string();
            assert_eq!(o.status.code(), Some(0), "seed {seed} {form}: {stderr}");
            let v = pairform(&["verify", "--input", pair, "--form-file", out]);
            assert_eq!(v.status.code(), Some(0), "seed {seed} {form}: {}", String::from_utf8_lossy(&v.stderr));
        }
    }
}

#[test]
fn generate_with_spec_reports_truth() {
    let o = pairform(&["generate", "--size", "5", "--seed", "3", "--spec", "positive:2:2:-,zero:1,nonreal:1:1:1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = stdout_json(&o);
    assert_eq!(doc["n"], json!(5));
    assert_eq!(doc["truth"].as_array().unwrap().len(), 3);
    let bad = pairform(&["generate", "--size", "4", "--spec", "zero:1"]);
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn convert_round_trip() {
    let dir = TempDir::new().unwrap();
    let pair = write(dir.path(), "p.json", &sip_nonreal_pair());
    let std_form = dir.path().join("std.json");
    let alt_form = dir.path().join("alt.json");
    let back = dir.path().join("back.json");
    let s = |p: &std::path::PathBuf| p.to_str().unwrap().to_string();
    assert_eq!(pairform(&["canonicalize", "-i", &pair, "-o", &s(&std_form)]).status.code(), Some(0));
    let o = pairform(&["convert", "-i", &pair, "--form-file", &s(&std_form), "--to", "alt", "-o", &s(&alt_form)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(pairform(&["verify", "-i", &pair, "--form-file", &s(&alt_form)]).status.code(), Some(0));
    let o = pairform(&["convert", "-i", &pair, "--form-file", &s(&alt_form), "--to", "standard", "-o", &s(&back)]);
    assert_eq!(o.status.code(), Some(0));
    let a: Value = serde_json::from_slice(&std::fs::read(&std_form).unwrap()).unwrap();
    let b: Value = serde_json::from_slice(&std::fs::read(&back).unwrap()).unwrap();
    assert_eq!(a["blocks"], b["blocks"]);
}

#[test]
fn verify_rejects_a_wrong_transition() {
    let dir = TempDir::new().unwrap();
    let pair = write(dir.path(), "p.json", &sip_nonreal_pair());
    let form = dir.path().join("f.json");
    assert_eq!(pairform(&["canonicalize", "-i", &pair, "-o", form.to_str().unwrap()]).status.code(), Some(0));
    let mut doc: Value = serde_json::from_slice(&std::fs::read(&form).unwrap()).unwrap();
    doc["M"][0][0] = json!([3.0, 1.0]);
    let bad = write(dir.path(), "bad.json", &doc);
    assert_eq!(pairform(&["verify", "-i", &pair, "--form-file", &bad]).status.code(), Some(1));
}

#[test]
fn io_and_parse_errors_exit_3() {
    let dir = TempDir::new().unwrap();
    assert_eq!(pairform(&["validate", "--input", "/nonexistent/p.json"]).status.code(), Some(3));
    let p = dir.path().join("junk.json");
    std::fs::write(&p, "{ not json").unwrap();
    assert_eq!(pairform(&["validate", "--input", p.to_str().unwrap()]).status.code(), Some(3));
    let short = write(dir.path(), "s.json", &json!({"n": 2, "H": [[[1.0, 0.0]]], "C": [[[1.0, 0.0]]]}));
    assert_eq!(pairform(&["validate", "--input", &short]).status.code(), Some(3));
    assert_eq!(pairform(&["frobnicate"]).status.code(), Some(3));
}

#[test]
fn tolerance_precedence() {
    let dir = TempDir::new().unwrap();
    // HC is off-symmetric by 1e-4 relative: rejected at the default verify_tol.
    let f = write(dir.path(), "p.json", &json!({"n": 1, "H": [[[1.0, 0.0]]], "C": [[[2.0, 0.0]]]}));
    let near = write(dir.path(), "q.json", &json!({"n": 2,
        "H": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]],
        "C": [[[1.0, 0.0], [1.0, 0.0]], [[1.0001, 0.0], [1.0, 0.0]]]}));
    assert_eq!(pairform(&["validate", "-i", &f]).status.code(), Some(0));
    assert_eq!(pairform(&["validate", "-i", &near]).status.code(), Some(1));
    let env_only = Command::new(env!("CARGO_BIN_EXE_pairform"))
        .args(["validate", "-i", &near])
        .env("PAIRFORM_VERIFY_TOL", "1e-2")
        .output()
        .unwrap();
    assert_eq!(env_only.status.code(), Some(0));
    let flag_wins = Command::new(env!("CARGO_BIN_EXE_pairform"))
        .args(["validate", "-i", &near, "--verify-tol", "1e-6"])
        .env("PAIRFORM_VERIFY_TOL", "1e-2")
        .output()
        .unwrap();
    assert_eq!(flag_wins.status.code(), Some(1));
    assert_eq!(pairform(&["validate", "-i", &f, "--verify-tol=-1"]).status.code(), Some(1));
}

#[test]
fn quick_selftest_passes() {
    let o = pairform(&["selftest", "--quick"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 10);
}
