mod common;

use std::path::Path;
use std::process::{Command, Output};

use chargeq::io::DeviceFile;
use chargeq::physics::{derive_params, ControlSettings};
use common::{data, symmetric_device, J_HZ};
use serde_json::Value;

fn chargeq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chargeq"))
        .args(args)
        .env_remove("CHARGEQ_MAX_QUBITS")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn assert_one_line(out: &Output, class: &str) {
    let err = stderr(out);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with(&format!("chargeq: error[{class}]: ")), "{err}");
}

#[test]
fn twenty_qubits_hit_the_size_cap() {
    let dev = data("device_20q.json");
    let tl = data("does_not_matter.json");
    let out = chargeq(&["simulate", "--device", path(&dev), "--timeline", path(&tl)]);
    assert_eq!(out.status.code(), Some(4));
    assert_one_line(&out, "size-cap");
}

#[test]
fn crowded_layout_reports_certificate() {
    let out = chargeq(&[
        "allocate",
        "--device",
        path(&data("device_40q.json")),
        "--layout",
        path(&data("layout_20_pairs.json")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let report = stdout_json(&out);
    assert_eq!(report["feasible"], Value::Bool(false));
    assert_eq!(report["certificate"]["kind"], "proven");
    assert_one_line(&out, "infeasible");
}

#[test]
fn feasible_allocation_validates() {
    let out = chargeq(&[
        "allocate",
        "--device",
        path(&data("device_4q.json")),
        "--layout",
        path(&data("layout_two_pairs.json")),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = stdout_json(&out);
    assert_eq!(report["validator_pass"], Value::Bool(true));
    let omega = report["omega_GHz"].as_array().unwrap();
    assert_eq!(omega[0], omega[1]);
    assert_ne!(omega[0], omega[2]);
}

#[test]
fn missing_and_malformed_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let out = chargeq(&["derive", "--device", path(&missing)]);
    assert_eq!(out.status.code(), Some(2));
    assert_one_line(&out, "input");

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"qubits\": [").unwrap();
    let out = chargeq(&["validate", "--device", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert_one_line(&out, "input");

    let circ = dir.path().join("bad.circ");
    std::fs::write(&circ, "RX q0 1\nCNOT q0 q1\n").unwrap();
    let out = chargeq(&["compile", "--device", path(&data("device_2q.json")), "--circuit", path(&circ)]);
    assert_eq!(out.status.code(), Some(2));
    assert_one_line(&out, "parse");
    assert!(stderr(&out).contains("line 2"));

    let out = chargeq(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert_one_line(&out, "usage");
}

#[test]
fn zero_mutual_capacitance_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = symmetric_device(3, J_HZ);
    for q in &mut spec.qubits {
        q.c_mutual = 0.0;
    }
    let file = dir.path().join("flat.json");
    std::fs::write(&file, serde_json::to_string(&DeviceFile::from_spec(&spec)).unwrap()).unwrap();
    let out = chargeq(&["derive", "--device", path(&file)]);
    assert_eq!(out.status.code(), Some(2));
    assert_one_line(&out, "degenerate-device");
}

#[test]
fn low_ej_over_ec_is_reported_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = symmetric_device(2, J_HZ);
    let p = derive_params(&spec, &ControlSettings::uniform(2, 0.0)).unwrap();
    // E_J = 2 E_J0 at zero flux, so this gives E_J / E_C = 50
    for (q, ec) in spec.qubits.iter_mut().zip(&p.e_charge) {
        q.ej0 = 25.0 * ec;
    }
    let file = dir.path().join("weak.json");
    std::fs::write(&file, serde_json::to_string(&DeviceFile::from_spec(&spec)).unwrap()).unwrap();
    let out = chargeq(&["validate", "--device", path(&file)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = stdout_json(&out);
    assert_eq!(report["pass"], Value::Bool(false));
    assert_eq!(report["qubits"][0]["ej_ec_pass"], Value::Bool(false));
    let ratio = report["qubits"][0]["ej_over_ec"].as_f64().unwrap();
    assert!((ratio - 50.0).abs() < 1e-9, "{ratio}");
}

#[test]
fn derive_reports_the_coupling() {
    let out = chargeq(&["derive", "--device", path(&data("device_2q.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    let j = report["j_couple_MHz"][0][1].as_f64().unwrap();
    // reported as J / 2pi
    assert!((j - 5.0).abs() < 1e-9, "{j}");
}

#[test]
fn run_sqiswap_is_exact_under_rwa() {
    let out = chargeq(&[
        "run",
        "--device",
        path(&data("device_2q.json")),
        "--circuit",
        path(&data("sqiswap.circ")),
        "--model",
        "rwa",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = stdout_json(&out);
    let f = report["end_to_end"].as_f64().unwrap();
    assert!((f - 1.0).abs() <= 1e-9, "{f}");
    assert_eq!(report["total_duration_ns"].as_f64(), Some(25.0));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let (device, circuit) = (data("device_5q.json"), data("mixed_5q.circ"));
    let args = [
        "--seed",
        "3",
        "run",
        "--device",
        path(&device),
        "--circuit",
        path(&circuit),
        "--model",
        "full",
    ];
    let a = chargeq(&args);
    let b = chargeq(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn compile_then_simulate_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let timeline = dir.path().join("t.json");
    let device = data("device_4q.json");
    let circuit = data("mixed_4q.circ");
    let out = chargeq(&["compile", "--device", path(&device), "--circuit", path(&circuit), "--out", path(&timeline)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out.stdout.is_empty());

    let sim = chargeq(&["simulate", "--device", path(&device), "--timeline", path(&timeline), "--model", "full"]);
    let run = chargeq(&["run", "--device", path(&device), "--circuit", path(&circuit), "--model", "full"]);
    assert_eq!(sim.status.code(), Some(0), "{}", stderr(&sim));
    let (s, r) = (stdout_json(&sim), stdout_json(&run));
    assert_eq!(s["end_to_end"], r["end_to_end"]);
    assert_eq!(s["per_segment"], r["per_segment"]);
    assert!(r["end_to_end"].as_f64().unwrap() >= 1.0 - 5e-3);
}
