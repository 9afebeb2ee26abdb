use std::path::PathBuf;
use std::process::{Command, Output};

use linsys_quanta::packet::pulsating_shape;
use serde_json::Value;

fn models() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linsys-quanta")).args(args).output().unwrap()
}

fn model(name: &str) -> String {
    models().join(name).to_string_lossy().into_owned()
}

fn json_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap()
}

#[test]
fn reduce_reports_normal_form() {
    let v = json_ok(&["reduce", &model("sho.json")]);
    assert_eq!(v["omega"], serde_json::json!([[0.0]]));
    let v = json_ok(&["reduce", &model("magnetic.json")]);
    assert_eq!(v["omega"], serde_json::json!([[0.0, 0.5], [-0.5, 0.0]]));
}

#[test]
fn asymmetric_kinetic_matrix_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"dim":2,"mass":1,"F":[[1,0.2],[0,1]],"Q":[[0,0],[0,0]],"U":[[1,0],[0,1]]}"#).unwrap();
    let out = run(&["reduce", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let e = error_of(&out);
    assert_eq!(e["error"]["code"], "NonSymmetricInput");
    assert!(e["error"]["message"].as_str().unwrap().contains('F'));
}

#[test]
fn missing_model_and_bad_flags_exit_three() {
    let out = run(&["ground", "no-such-model.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_of(&out)["error"]["code"], "Io");
    let out = run(&["ground", &model("sho.json"), "--hbar", "-1"]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_of(&out)["error"]["code"], "InvalidArgument");
}

#[test]
fn modes_json_layout() {
    let v = json_ok(&["modes", &model("magnetic.json")]);
    let freqs = v["freqs"].as_array().unwrap();
    assert_eq!(freqs.len(), 4);
    assert!((freqs[0]["re"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((freqs[1]["re"].as_f64().unwrap() - 1.5).abs() < 1e-12);
    assert_eq!(v["pairing"], serde_json::json!([2, 3, 0, 1]));
    assert_eq!(v["amps"][0]["R"].as_array().unwrap().len(), 2);
    assert!(v["amps"][0]["P"][0]["im"].is_number());
}

#[test]
fn ground_shapes() {
    let v = json_ok(&["ground", &model("sho.json")]);
    assert!((v["K0"]["re"][0][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["residual"].as_f64().unwrap() < 1e-8);
    let v = json_ok(&["ground", &model("anisotropic.json")]);
    let re = &v["K0"]["re"];
    assert!((re[0][0].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!((re[1][1].as_f64().unwrap() - 1.7).abs() < 1e-10);
    assert!(re[0][1].as_f64().unwrap().abs() < 1e-10);
}

#[test]
fn inverted_oscillator_has_no_physical_state() {
    for cmd in ["ground", "spectrum", "verify"] {
        let out = run(&[cmd, &model("inverted.json")]);
        assert_eq!(out.status.code(), Some(2));
        assert_eq!(error_of(&out)["error"]["code"], "NoPhysicalState");
    }
}

#[test]
fn spectrum_of_oscillator() {
    let v = json_ok(&["spectrum", &model("sho.json"), "--max-total", "3"]);
    let e: Vec<f64> = v.as_array().unwrap().iter().map(|l| l["energy"].as_f64().unwrap()).collect();
    assert_eq!(e.len(), 4);
    for (got, want) in e.iter().zip([0.5, 1.5, 2.5, 3.5]) {
        assert!((got - want).abs() < 1e-12);
    }
    let v = json_ok(&["spectrum", &model("sho.json"), "--max-total", "1", "--hbar", "0.5"]);
    assert!((v[1]["energy"].as_f64().unwrap() - 0.75).abs() < 1e-12);
}

#[test]
fn evolve_matches_pulsating_closed_form() {
    let out = run(&["evolve", &model("sho.json"), "--shape-scale", "2", "--dt", "0.001", "--tmax", "6.283185307179586"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,K00_re,K00_im,R0,P0,normN,phase");
    let mut last = 0.0;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let alpha = pulsating_shape(2.0, 1.0, v[0]);
        assert!((v[1] - alpha.re).abs() < 1e-8 && (v[2] - alpha.im).abs() < 1e-8, "{line}");
        last = v[0];
    }
    assert!((last - std::f64::consts::TAU).abs() < 1e-12);
}

#[test]
fn verify_magnetic_system() {
    let v = json_ok(&["verify", &model("magnetic.json"), "--grid-points", "201"]);
    assert_eq!(v["pass"], true);
    assert!(v["states"][0]["residual"].as_f64().unwrap() <= 1e-3);
    let out = run(&["verify", &model("sho.json"), "--max-total", "2", "--grid-points", "601", "--format", "text"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("PASS"));
}

#[test]
fn states_write_one_grid_per_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "states",
        &model("anisotropic.json"),
        "--max-total",
        "1",
        "--grid-points",
        "21",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    for name in ["state_0_0.csv", "state_1_0.csv", "state_0_1.csv"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(text.lines().count(), 1 + 21 * 21);
        assert!(text.starts_with("x0,x1,re_"));
    }
}

#[test]
fn coherent_is_reproducible_and_consistent() {
    let args = ["coherent", &model("magnetic.json"), "--seed", "7", "--t", "1.3", "--grid-points", "41"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(v["grid_check"]["form_difference"].as_f64().unwrap() <= 1e-8);
    assert!(v["grid_check"]["expansion_difference"].as_f64().unwrap() <= 1e-4);
    let other = run(&["coherent", &model("magnetic.json"), "--seed", "8", "--t", "1.3", "--grid-points", "41"]);
    assert_ne!(a.stdout, other.stdout);
    let v = json_ok(&["coherent", &model("sho.json"), "--lambda", "0:0", "--max-total", "2"]);
    assert!((v["coefficients"][0]["re"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["coefficients"][1]["re"].as_f64().unwrap().abs() < 1e-15);
}

#[test]
fn hermite_values() {
    let v = json_ok(&["hermite-eval", "--gamma", "2", "--x", "0.5", "--index", "3"]);
    assert!((v["values"][0]["re"].as_f64().unwrap() + 5.0).abs() < 1e-12);
    let v = json_ok(&["hermite-eval", "--gamma", "2,0;0,2", "--x", "0.5,1", "--max-total", "2"]);
    assert_eq!(v["values"].as_array().unwrap().len(), 6);
    let out = run(&["hermite-eval", "--gamma", "1,2;3,1", "--x", "0,0"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn driven_general_model_runs() {
    let v = json_ok(&["reduce", &model("driven.json")]);
    assert_eq!(v["g"]["kind"], "sum");
    let out = run(&["evolve", &model("driven.json"), "--r0", "0.1,0.2", "--tmax", "1"]);
    assert!(out.status.success());
    let out = run(&["evolve", &model("driven.json"), "--r0", "0.1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn out_directory_receives_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["ground", &model("magnetic.json"), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("ground.json")).unwrap()).unwrap();
    assert_eq!(v["selection"].as_array().unwrap().len(), 2);
}
