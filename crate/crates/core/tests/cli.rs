//! The `innerdyn` binary: subcommands, flags, configs and exit codes.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn innerdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_innerdyn"))
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr));
    })
}

#[test]
fn every_subcommand_exists() {
    for sub in [
        "simulate",
        "invariance",
        "occupation",
        "returns",
        "escapes",
        "darling-kac",
        "arcsine-occ",
        "arcsine-last",
        "wandering",
        "hopf",
        "circle-model",
        "periodic",
        "mapping",
        "afn-check",
        "distortion",
        "exp-baker",
        "suite",
        "run",
    ] {
        let out = innerdyn(&[sub, "--help"]);
        assert!(out.status.success(), "{sub}");
    }
    for part in ["codes", "hairs", "identities"] {
        assert!(innerdyn(&["exp-baker", part, "--help"]).status.success());
    }
}

#[test]
fn simulate_writes_csv_and_json_header() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = innerdyn(&["simulate", "--horizon", "50", "--seed", "3", "--out-dir", d]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["seed"], 3);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["horizons"][0], 50);

    let csv = std::fs::read_to_string(dir.path().join("simulate.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,x"));
    assert_eq!(lines.next(), Some("0,2"));
    assert_eq!(lines.next(), Some("1,1.5"));
    assert_eq!(csv.lines().count(), 51);

    let header: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("simulate.json")).unwrap())
            .unwrap();
    assert_eq!(header["config"]["seed"], 3);
}

#[test]
fn flags_reach_the_experiment() {
    let out = innerdyn(&["afn-check", "--K", "1.5", "--grid", "1000"]);
    assert!(out.status.success());
    let v = json(&out);
    let p = v["summary"]["fine"]["p"].as_f64().unwrap();
    assert!((p * p - 18.0).abs() < 1e-9);

    let out = innerdyn(&[
        "invariance",
        "--map",
        "generalized_boole:-2,-1,1,2",
        "--samples",
        "20",
    ]);
    assert!(out.status.success());
    assert_eq!(json(&out)["config"]["poles"].as_array().unwrap().len(), 4);
}

#[test]
fn config_file_runs_and_unknown_keys_fail() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    std::fs::write(&good, "experiment = \"periodic\"\ncenters = 5\n").unwrap();
    let out = innerdyn(&["run", "--config", good.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(json(&out)["config"]["centers"], 5);

    // flags override the file
    let out = innerdyn(&[
        "periodic",
        "--config",
        good.to_str().unwrap(),
        "--seed",
        "12",
    ]);
    assert_eq!(json(&out)["seed"], 12);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "experiment = \"periodic\"\nresidual_maxx = 1.0\n").unwrap();
    let out = innerdyn(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("residual_maxx"));
}

#[test]
fn unknown_profile_is_rejected() {
    let out = innerdyn(&["suite", "--profile", "weekend"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("profile"));
}

fn csvs(dir: &Path) -> Vec<(String, String)> {
    let mut files: Vec<(String, String)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read_to_string(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn smoke_suite_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = innerdyn(&[
            "suite",
            "--profile",
            "smoke",
            "--out-dir",
            d.path().to_str().unwrap(),
        ]);
        // the Kac sum of the circle model is known to miss its window
        assert_eq!(out.status.code(), Some(1));
        let v = json(&out);
        let failed: Vec<String> = v["results"]
            .as_array()
            .unwrap()
            .iter()
            .flat_map(|r| r["criteria"].as_array().unwrap().clone())
            .filter(|c| c["pass"] == false)
            .map(|c| c["name"].as_str().unwrap().to_string())
            .collect();
        assert_eq!(failed, ["Kac sum"]);
    }
    let (ca, cb) = (csvs(a.path()), csvs(b.path()));
    assert!(ca.len() > 18);
    assert_eq!(ca, cb);
}

#[test]
fn readme_documents_the_csv_columns() {
    let readme =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../README.md")).unwrap();
    assert!(readme.contains(&innerdyn::experiments::csv_columns_markdown()));
}
