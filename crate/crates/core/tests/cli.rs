mod common;

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn chronoflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chronoflow")).args(args).env("CHRONOFLOW_LOG", "off").output().unwrap()
}

fn config(stem: &str) -> String {
    common::data(&format!("configs/{stem}.json")).display().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|_| panic!("stderr: {}", String::from_utf8_lossy(&o.stderr)))
}

#[test]
fn bit_flip_kernel_is_not_embeddable() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = chronoflow(&["--config", &config("markov_embed"), "--out", out, "markov", "embed"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let embed = read_json(&dir.path().join("embed.json"));
    assert_eq!(embed["embeddability"]["verdict"], "NotEmbeddable");
}

#[test]
fn missing_input_is_exit_3_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"kernel": "absent/kernel.json"}"#).unwrap();
    let o = chronoflow(&["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "markov", "embed"]);
    assert_eq!(o.status.code(), Some(3));
    let e = stderr_json(&o);
    assert_eq!(e["error"]["kind"], "input");
    assert_eq!(e["error"]["path"], dir.path().join("absent/kernel.json").display().to_string());
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn missing_config_is_exit_3() {
    let o = chronoflow(&["--config", "/nonexistent/config.json", "hinge"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"]["path"], "/nonexistent/config.json");
}

#[test]
fn schema_violations_are_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"kernel": {"states": 2, "matrix": [[0, 1], [1, 0]]}, "unknown_key": 1}"#,
        r#"{"kernel": {"states": 2, "matrix": [[0, 1], [1, 0]]}, "seed": "seven"}"#,
        r#"{"tolerance": 1e-9}"#,
        r#"[1, 2, 3]"#,
        r#"{not json"#,
    ];
    for (i, text) in cases.iter().enumerate() {
        let cfg = dir.path().join(format!("c{i}.json"));
        std::fs::write(&cfg, text).unwrap();
        let o = chronoflow(&["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "markov", "embed"]);
        assert_eq!(o.status.code(), Some(2), "case {i}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(stderr_json(&o)["error"]["kind"], "schema");
    }
    let o = chronoflow(&["markov", "embed", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"]["kind"], "schema");
    let o = chronoflow(&["--format", "xml", "pca"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failure_is_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"rates": {"states": 2, "matrix": [[-10, 10], [10, -10]]}, "initial": [1, 0], "t_final": 1, "dt": 0.1}"#,
    )
    .unwrap();
    let o = chronoflow(&["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "markov", "master"]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stderr_json(&o)["error"]["kind"], "numerical");
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(chronoflow(&["--help"]).status.code(), Some(0));
    assert_eq!(chronoflow(&["sde", "--help"]).status.code(), Some(0));
    assert_eq!(chronoflow(&["--version"]).status.code(), Some(0));
}

#[test]
fn hinge_fixture_recovers_breakpoints() {
    let dir = tempfile::tempdir().unwrap();
    let o = chronoflow(&["--config", &config("hinge"), "--out", dir.path().to_str().unwrap(), "hinge"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let fit = read_json(&dir.path().join("fit.json"));
    let b: Vec<f64> = fit["breakpoints"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(b.len(), 2);
    assert!((b[0] + 2.5).abs() <= 0.05 && (b[1] + 0.5).abs() <= 0.05, "{b:?}");
    let report = read_json(&dir.path().join("report.json"));
    assert_eq!(report["timing"]["counts"].as_object().unwrap().values().map(|v| v.as_u64().unwrap()).sum::<u64>(), 20);
    assert!(std::fs::read_to_string(dir.path().join("hinge.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn manifest_lists_outputs_with_digests_and_explicit_seed() {
    let dir = tempfile::tempdir().unwrap();
    let o = chronoflow(&["--config", &config("nullmodel"), "--out", dir.path().to_str().unwrap(), "nullmodel"]);
    assert_eq!(o.status.code(), Some(0));
    let m = read_json(&dir.path().join("manifest.json"));
    assert_eq!(m["tool"], "chronoflow");
    assert_eq!(m["config"]["command"], "nullmodel");
    assert_eq!(m["config"]["seed"], chronoflow::nullmodel::REFERENCE_SEED);
    let outputs = m["outputs"].as_array().unwrap();
    let names: Vec<&str> = outputs.iter().map(|o| o["file"].as_str().unwrap()).collect();
    assert_eq!(names, ["report.json", "ensemble.csv", "histogram.svg"]);
    for o in outputs {
        let bytes = std::fs::read(dir.path().join(o["file"].as_str().unwrap())).unwrap();
        assert_eq!(o["sha256"], chronoflow::cli::sha256_hex(&bytes));
        assert_eq!(o["bytes"], bytes.len());
    }
    let report = read_json(&dir.path().join("report.json"));
    assert!(report["report"]["p_value"].as_f64().unwrap() < 0.05);
    assert_eq!(report["clusters_without_attractor"], true);
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = chronoflow(&[
        "--config",
        &config("markov_simulate"),
        "--out",
        out,
        "--seed",
        "99",
        "--format",
        "json",
        "markov",
        "simulate",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let m = read_json(&dir.path().join("manifest.json"));
    assert_eq!(m["config"]["seed"], 99);
    assert_eq!(m["config"]["format"], "json");
    let rows = read_json(&dir.path().join("sequence.json"));
    assert_eq!(rows.as_array().unwrap().len(), 1001);
    assert_eq!(rows[0]["state"], 0);
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = chronoflow(&["--config", &config("sde_plot"), "--out", dir.path().to_str().unwrap(), "sde", "plot"]);
        assert_eq!(o.status.code(), Some(0));
    }
    let svg = |d: &tempfile::TempDir| std::fs::read(d.path().join("field.svg")).unwrap();
    assert_eq!(svg(&a), svg(&b));
}

#[test]
fn rerun_reproduces_and_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let o = chronoflow(&["--config", &config("pca"), "--out", first.to_str().unwrap(), "pca"]);
    assert_eq!(o.status.code(), Some(0));
    let manifest = first.join("manifest.json");
    let second = dir.path().join("second");
    let o = chronoflow(&["rerun", manifest.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(first.join("scores.csv")).unwrap(), std::fs::read(second.join("scores.csv")).unwrap());

    let mut m = read_json(&manifest);
    m["outputs"][0]["sha256"] = Value::from("0".repeat(64));
    std::fs::write(&manifest, serde_json::to_string(&m).unwrap()).unwrap();
    let third = dir.path().join("third");
    let o = chronoflow(&["rerun", manifest.to_str().unwrap(), "--out", third.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"]["kind"], "mismatch");
}
