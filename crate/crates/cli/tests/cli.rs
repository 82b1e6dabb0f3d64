use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_operadic")).args(args).output().unwrap()
}

fn report(args: &[&str]) -> (i32, Value) {
    let out = run(args);
    let code = out.status.code().unwrap();
    (code, serde_json::from_slice(&out.stdout).unwrap_or(Value::Null))
}

fn statuses(r: &Value) -> Vec<(String, String)> {
    r["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| (v["check"].as_str().unwrap().to_string(), v["status"].as_str().unwrap().to_string()))
        .collect()
}

fn path(name: &str) -> String {
    data(name).display().to_string()
}

#[test]
fn check_passes_on_the_shipped_com_operad() {
    let (code, r) = report(&["check", &path("com.json")]);
    assert_eq!(code, 0);
    assert_eq!(statuses(&r), vec![("operad Com axioms".to_string(), "pass".to_string())]);
}

#[test]
fn free_reports_symmetric_algebra_dimensions() {
    let (code, r) = report(&["free", &path("poly2.json")]);
    assert_eq!(code, 0);
    let dims: Vec<u64> = r["dimensions"]["F_Com by weight"]
        .as_object()
        .unwrap()
        .values()
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert_eq!(dims, vec![1, 2, 3, 4, 5]);
}

#[test]
fn weight_cap_flag_overrides_the_file() {
    let (_, r) = report(&["free", &path("poly2.json"), "--weight-cap", "2"]);
    assert_eq!(r["dimensions"]["F_Com by weight"].as_object().unwrap().len(), 3);
    assert_eq!(r["config"]["weight_cap"], 2);
}

#[test]
fn atiyah_class_of_a_free_module_is_zero() {
    let (code, r) = report(&["atiyah", &path("free_module.json")]);
    assert_eq!(code, 0);
    assert_eq!(r["findings"]["class"], "0");
    let (code, r) = report(&["atiyah", &path("twisted_module.json")]);
    assert_eq!(code, 0);
    assert_eq!(r["findings"]["class"], "nonzero");
    assert!(!r["representatives"]["atiyah class (connection)"].as_array().unwrap().is_empty());
}

#[test]
fn curvature_and_bianchi_on_the_twisted_instance() {
    let (code, r) = report(&["curvature", &path("twisted_mc.json")]);
    assert_eq!(code, 0);
    let checks: Vec<String> = statuses(&r).into_iter().map(|(c, _)| c).collect();
    assert!(checks.iter().any(|c| c == "α̂∘α = -[∂, R^(3)]"));
    assert!(checks.iter().any(|c| c == "module Bianchi homotopy found"));
    assert!(r["witnesses"]["Bianchi homotopy"].is_array());
}

#[test]
fn mc_pipeline() {
    let (code, r) = report(&["mc", &path("ce2.json")]);
    assert_eq!(code, 0, "{r}");
    let (code, r) = report(&["mc", &path("twisted_mc.json"), "--order", "2"]);
    assert_eq!(code, 0);
    assert_eq!(r["findings"]["transport without exp(ad ∇)"], "detected");
    assert!(r["representatives"]["g_2"].is_array());
    let (code, r) = report(&["mc", &path("ce3_broken.json")]);
    assert_eq!(code, 1);
    assert!(!r["representatives"]["MC defect"].as_array().unwrap().is_empty());
}

#[test]
fn reports_are_deterministic() {
    let a = run(&["mc", &path("twisted_mc.json")]);
    let b = run(&["mc", &path("twisted_mc.json")]);
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["free", &path("poly2.json"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["schema"], "report/v1");
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("PASS"));
}

#[test]
fn leaving_the_degree_window_is_truncation_limited() {
    let (code, _) = report(&["free", &path("poly2.json"), "--degrees", "1:3"]);
    assert_eq!(code, 2);
    let (code, _) = report(&["free", &path("poly2.json"), "--degrees", "-2:3"]);
    assert_eq!(code, 0);
}

#[test]
fn input_errors_exit_with_three() {
    assert_eq!(run(&["free", "/nonexistent.json"]).status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"schema": "algebra/v0"}"#).unwrap();
    assert_eq!(run(&["check", bad.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn strict_rejects_operads_failing_their_axioms() {
    let dir = tempfile::tempdir().unwrap();
    let mut op: Value = serde_json::from_str(&std::fs::read_to_string(data("com.json")).unwrap()).unwrap();
    let gamma = op["gamma"].as_array_mut().unwrap();
    let entry = gamma.iter_mut().find(|g| g["tuple"] == serde_json::json!([2, 1, 1])).unwrap();
    entry["matrix"][0][2] = "-1".into();
    std::fs::write(dir.path().join("bad_com.json"), op.to_string()).unwrap();
    let alg = serde_json::json!({
        "schema": "algebra/v1",
        "name": "k[x]",
        "operad": { "file": "bad_com.json" },
        "structure": { "free": { "generators": { "basis": [ { "degree": 0, "weight": 1, "label": "x" } ] }, "weight_cap": 2 } }
    });
    let alg_path = dir.path().join("alg.json");
    std::fs::write(&alg_path, alg.to_string()).unwrap();
    let p = alg_path.to_str().unwrap();

    let (code, r) = report(&["free", p]);
    assert_eq!(code, 0);
    assert!(!r["warnings"].as_array().unwrap().is_empty());
    assert_eq!(run(&["free", p, "--strict"]).status.code(), Some(1));
    let (code, r) = report(&["check", dir.path().join("bad_com.json").to_str().unwrap()]);
    assert_eq!(code, 1);
    // failures name the diagram that broke
    assert!(r["verdicts"][0]["detail"].as_str().unwrap().contains("operad.unit.right"));
}
