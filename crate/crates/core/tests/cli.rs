mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::fixtures_dir;

fn caa(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_caa"))
        .arg("--config")
        .arg(fixtures_dir().join("config.toml"))
        .arg("--output-dir")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn report_without_scores_names_the_missing_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let out = caa(tmp.path(), &["report"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("score"));
}

#[test]
fn aggregate_before_ingest_is_a_missing_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let out = caa(tmp.path(), &["aggregate"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ingest"));
}

#[test]
fn invalid_config_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "seed = 1\n[classifier]\nn_folds = 1\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_caa"))
        .arg("--config")
        .arg(&cfg)
        .arg("--output-dir")
        .arg(tmp.path())
        .arg("aggregate")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn ingest_writes_stamped_outputs_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = caa(tmp.path(), &["ingest"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let agg = caa(tmp.path(), &["aggregate"]);
    assert!(agg.status.success());
    let agreement = caa(tmp.path(), &["agreement"]);
    assert!(agreement.status.success());
    let csv = std::fs::read_to_string(tmp.path().join("agreement.csv")).unwrap();
    assert!(csv.starts_with("# config_hash="));
    assert!(csv.lines().nth(1).unwrap().starts_with("language,dimension,n_instances,alpha"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("manifests/agreement.json")).unwrap()).unwrap();
    assert!(manifest.get("created_unix").is_some());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("annotator_report.json")).unwrap()).unwrap();
    assert!(report.get("config_hash").is_some() && report.get("data").is_some());
}

#[test]
fn seed_override_changes_the_config_hash() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(caa(a.path(), &["ingest"]).status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_caa"))
        .arg("--config")
        .arg(fixtures_dir().join("config.toml"))
        .arg("--output-dir")
        .arg(b.path())
        .args(["--seed", "99", "ingest"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let head = |p: &Path| {
        std::fs::read_to_string(p.join("annotator_report.json"))
            .map(|t| serde_json::from_str::<serde_json::Value>(&t).unwrap()["config_hash"].clone())
            .unwrap()
    };
    assert_ne!(head(a.path()), head(b.path()));
}
