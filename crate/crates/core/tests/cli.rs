use std::process::{Command, Output};

use serde_json::Value;

fn logvvmf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logvvmf"))
        .args(args)
        .env_remove("LOGVVMF_PRECISION")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn manifest_line(out: &Output) -> Value {
    let err = String::from_utf8_lossy(&out.stderr);
    let line = err.lines().last().expect("manifest on stderr");
    serde_json::from_str(line).expect("manifest is one JSON line")
}

#[test]
fn decompose_prints_the_word() {
    let out = logvvmf(&["decompose", "--matrix", "2,1,1,1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["word"], serde_json::json!([1]));
    assert_eq!(v["shift"], 2);
    assert_eq!(v["length"], 2);
    assert_eq!(v["reconstruction_ok"], true);
    let m = manifest_line(&out);
    assert_eq!(m["command"], "decompose");
    assert_eq!(m["exit_code"], 0);
}

#[test]
fn exit_codes() {
    // not unimodular
    assert_eq!(
        logvvmf(&["decompose", "--matrix", "2,0,0,1"]).status.code(),
        Some(1)
    );
    // unknown subcommand and missing argument
    assert_eq!(logvvmf(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(logvvmf(&["decompose"]).status.code(), Some(2));
    // a wrong-length k vector is a domain error
    let out = logvvmf(&[
        "poincare-eval",
        "--rep",
        "standard",
        "--nu",
        "0",
        "--k",
        "7",
        "--tau",
        "0,1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(manifest_line(&out)["exit_code"], 1);
}

#[test]
fn manifest_goes_to_a_file_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    let out = logvvmf(&[
        "eval-rep",
        "--rep",
        "standard",
        "--matrix",
        "1,1,0,1",
        "--manifest",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stderr.is_empty(), "{}", String::from_utf8_lossy(&out.stderr));
    let m: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for key in [
        "command",
        "argv",
        "config",
        "versions",
        "threads",
        "wall_time_s",
        "exit_code",
    ] {
        assert!(m.get(key).is_some(), "manifest lacks {key}");
    }
}

#[test]
fn output_is_reproducible_across_runs_and_threads() {
    let base = [
        "poincare-eval",
        "--rep",
        "standard",
        "--nu",
        "0",
        "--k",
        "7,7",
        "--N",
        "30",
        "--tau",
        "0.1,1.2",
    ];
    let run = |threads: &str| {
        let mut args = base.to_vec();
        args.extend(["--threads", threads]);
        logvvmf(&args)
    };
    let a = run("1");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, run("1").stdout);
    assert_eq!(a.stdout, run("4").stdout);
}

#[test]
fn precision_layers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"precision": 6}"#).unwrap();
    let args = ["eval-rep", "--rep", "standard", "--matrix", "0,-1,1,0"];

    let from_env = Command::new(env!("CARGO_BIN_EXE_logvvmf"))
        .args(args)
        .env("LOGVVMF_PRECISION", "9")
        .output()
        .unwrap();
    assert_eq!(manifest_line(&from_env)["config"]["precision"], 9);

    let mut with_file = args.to_vec();
    with_file.extend(["--config", cfg.to_str().unwrap()]);
    let out = logvvmf(&with_file);
    assert_eq!(manifest_line(&out)["config"]["precision"], 6);

    with_file.extend(["--precision", "12"]);
    let out = logvvmf(&with_file);
    assert_eq!(manifest_line(&out)["config"]["precision"], 12);

    let out = logvvmf(&[&args[..], &["--precision", "40"]].concat());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(manifest_line(&out)["config"]["precision"], 17);
}

#[test]
fn bad_config_file_is_a_usage_or_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"precison": 6}"#).unwrap();
    let out = logvvmf(&[
        "decompose",
        "--matrix",
        "1,0,0,1",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn mlde_find_reports_the_exact_equation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.json");
    // (tau, 1): tau as a constant-term series of tau-degree one, and 1
    let f = serde_json::json!([
        {"mu": "0", "order": 40, "terms": [[0, 1, "1"]]},
        {"mu": "0", "order": 40, "terms": [[0, 0, "1"]]}
    ]);
    std::fs::write(&path, f.to_string()).unwrap();
    let out = logvvmf(&[
        "mlde-find",
        "--components",
        path.to_str().unwrap(),
        "--weight",
        "-1",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&out);
    assert_eq!(v["mode"], "exact");
    assert_eq!(v["order"], 2);
    assert_eq!(v["span"], serde_json::json!([0, 1]));
}

#[test]
fn csv_output_for_poincare_eval() {
    let out = logvvmf(&[
        "poincare-eval",
        "--rep",
        "trivial",
        "--nu",
        "0",
        "--k",
        "12",
        "--N",
        "10",
        "--tau",
        "0,1",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("row,col,re,im"));
    assert_eq!(lines.count(), 1);
}
