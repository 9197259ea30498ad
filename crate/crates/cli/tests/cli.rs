//! End-to-end checks of the binary: exit codes, JSON shape, determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_freeball"))
}

fn write_temp(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("freeball-cli-test-{name}"));
    std::fs::write(&path, contents).unwrap();
    path
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const SCALAR_POINT: &str = r#"{
  "d": 2, "level": 1,
  "matrices": [
    { "rows": 1, "cols": 1, "data": [[0.3, 0.1]] },
    { "rows": 1, "cols": 1, "data": [[-0.2, 0.0]] }
  ]
}"#;

#[test]
fn eval_reports_value_and_config() {
    let point = write_temp("point.json", SCALAR_POINT);
    let out = bin()
        .args(["eval", "--expr", "(1 - Z1*Z2)^-1", "--point"])
        .arg(&point)
        .args(["--seed", "5"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["config"]["seed"], 5);
    assert!(v["version"].is_string());
    // scalar geometric series: 1 / (1 - (0.3 + 0.1i)(-0.2))
    let re = v["result"]["value"]["data"][0][0].as_f64().unwrap();
    let z = num_complex::Complex64::new(0.3, 0.1) * -0.2;
    let expect = (num_complex::Complex64::new(1.0, 0.0) - z).inv();
    assert!((re - expect.re).abs() < 1e-12);
}

#[test]
fn missing_input_file_is_exit_code_2_with_json_stderr() {
    let out = bin()
        .args(["eval", "--expr", "Z1", "--point", "/nonexistent/nope.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], "input");
}

#[test]
fn stability_verdict_failure_is_exit_code_1() {
    let out = bin()
        .args(["stable", "--expr", "Z1", "--ball", "polydisk", "--samples", "10"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert!(v["result"]["verdict"]["SingularWitness"].is_object());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], "verdict");
}

#[test]
fn unknown_reproduce_id_is_input_error() {
    let out = bin().args(["reproduce", "no-such-example"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reproduce_pencil_example_passes() {
    let out = bin().args(["reproduce", "eg2.6"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["result"]["verdict"], "pass");
    assert_eq!(v["result"]["values"]["pad"], 2.0);
}

#[test]
fn same_seed_gives_byte_identical_reports() {
    let run = || {
        bin()
            .args(["reproduce", "ex3.3", "--seed", "99"])
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn seed_env_var_is_the_default() {
    let out = bin()
        .args(["reproduce", "ex3.3"])
        .env("FREEBALL_SEED", "123")
        .output()
        .unwrap();
    let v = stdout_json(&out);
    assert_eq!(v["config"]["seed"], 123);
}

#[test]
fn output_flag_writes_the_report_to_a_file() {
    let path = std::env::temp_dir().join("freeball-cli-test-report.json");
    let _ = std::fs::remove_file(&path);
    let out = bin()
        .args(["reproduce", "ex3.3", "--output"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["result"]["verdict"], "pass");
}
