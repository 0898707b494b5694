use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use propensity_cli::artifacts::RunManifest;

const SMALL: &str = r#"
seed = 3

[data.generator]
preset = "outflow"
n = 1500
prevalence = 0.04

[resample.adasyn]
target_ratio = 0.2

[tune]
budget = 4
cv_folds = 3

[tune.space]
n_trees = [10, 40]
max_depth = [2, 4]

[evaluate]
k = 3
"#;

const ARTIFACTS: [&str; 14] = [
    "dataset.csv",
    "schema.json",
    "balanced.csv",
    "balance_audit.json",
    "tune_result.json",
    "model.json",
    "metrics.json",
    "metrics.txt",
    "shap.csv",
    "importance.json",
    "importance.txt",
    "cart.json",
    "rules.txt",
    "manifest.json",
];

fn propensity(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_propensity")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("pipeline.toml");
    fs::write(&p, text).unwrap();
    p
}

fn run_ok(args: &[&str]) {
    let out = propensity(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn run_all(config: &Path, out: &Path, threads: &str) {
    run_ok(&["run-all", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", threads]);
}

/// Manifest JSON with wall-clock timings removed.
fn manifest_without_timings(dir: &Path) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    for stage in v["stages"].as_object_mut().unwrap().values_mut() {
        stage.as_object_mut().unwrap().remove("wall_clock_s");
    }
    v
}

fn assert_same_artifacts(a: &Path, b: &Path) {
    for f in ARTIFACTS.iter().filter(|f| **f != "manifest.json") {
        assert!(fs::read(a.join(f)).unwrap() == fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    assert_eq!(manifest_without_timings(a), manifest_without_timings(b));
}

fn error_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().unwrap_or_default();
    serde_json::from_str(line).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {text}"))
}

#[test]
fn run_all_writes_every_artifact_and_repeats_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_all(&cfg, &a, "1");
    run_all(&cfg, &b, "2");
    for f in ARTIFACTS {
        assert!(a.join(f).is_file(), "missing {f}");
    }
    assert_same_artifacts(&a, &b);

    let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.stages.len(), 6);
    assert!(manifest.verify(&a).is_empty());
    fs::write(a.join("rules.txt"), "tampered\n").unwrap();
    assert_eq!(manifest.verify(&a), vec!["rules.txt".to_string()]);

    let table = fs::read_to_string(b.join("metrics.txt")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert!(rows[0].starts_with("metric"));
    for name in ["PR-AUC", "Recall", "Specificity", "Accuracy"] {
        assert!(rows.iter().any(|r| r.starts_with(name)), "{name} row missing:\n{table}");
    }
    let metrics: serde_json::Value = serde_json::from_str(&fs::read_to_string(b.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["k"], 3);
    assert!(metrics["config_digest"].is_string());
}

#[test]
fn stages_run_one_by_one_match_run_all() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (whole, staged) = (dir.path().join("whole"), dir.path().join("staged"));
    run_all(&cfg, &whole, "1");
    for stage in ["generate", "balance", "tune", "train", "evaluate", "explain"] {
        run_ok(&[stage, "--config", cfg.to_str().unwrap(), "--out", staged.to_str().unwrap()]);
    }
    assert_same_artifacts(&whole, &staged);
}

#[test]
fn seed_flag_changes_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_ok(&["generate", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    run_ok(&["generate", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap(), "--seed", "4"]);
    assert_ne!(fs::read(a.join("dataset.csv")).unwrap(), fs::read(b.join("dataset.csv")).unwrap());
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}\nbogus = 1\n"));
    let out = propensity(&["generate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = error_json(&out);
    assert_eq!(err["error"]["kind"], "config");
    assert_eq!(err["error"]["exit_code"], 2);

    let out = propensity(&["generate", "--config", dir.path().join("absent.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn data_errors_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.csv"), "x,label\n1.0,0\n2.0,7\n").unwrap();
    let cfg = write_config(dir.path(), "seed = 1\n[data]\npath = \"bad.csv\"\n");
    let out = propensity(&["generate", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_json(&out)["error"]["kind"], "data");

    fs::write(dir.path().join("one.csv"), "x,label\n1.0,0\n2.0,0\n").unwrap();
    let cfg = write_config(dir.path(), "seed = 1\n[data]\npath = \"one.csv\"\n");
    let out = propensity(&["generate", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn stage_errors_exit_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = propensity(&["train", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    let err = error_json(&out);
    assert_eq!(err["error"]["kind"], "stage");
    assert_eq!(err["error"]["stage"], "train");
}

#[test]
fn artifacts_from_another_config_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out_dir = dir.path().join("o");
    let o = out_dir.to_str().unwrap();
    for stage in ["generate", "balance", "tune"] {
        run_ok(&[stage, "--config", cfg.to_str().unwrap(), "--out", o]);
    }
    let out = propensity(&["train", "--config", cfg.to_str().unwrap(), "--out", o, "--seed", "99"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn demo_config_is_printed() {
    let out = propensity(&["demo-config"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("[tune]"));
}
