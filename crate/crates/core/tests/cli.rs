mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gbter_anomaly::cli::RunManifest;
use gbter_anomaly::GbterParams;

fn gbter(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gbter"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn fit_recovers_two_cliques() {
    let dir = tempfile::tempdir().unwrap();
    let seq = common::write_sequence(dir.path(), 40, 1);
    let out = gbter(&["fit", seq.to_str().unwrap(), "--out", "fitted"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("2 communities"), "{stdout}");

    let params = GbterParams::load(dir.path().join("fitted/params.json")).unwrap();
    assert_eq!(params.partition(), common::two_cliques().partition());
    assert!(dir.path().join("fitted/posterior.json").exists());
}

#[test]
fn stream_writes_a_replayable_run() {
    let dir = tempfile::tempdir().unwrap();
    let seq = common::write_sequence(dir.path(), 30, 2);
    let cfg = write_config(dir.path(), "mc_samples = 200\n");
    let run = |out: &str| gbter(&["--config", &cfg, "--out", out, "stream", seq.to_str().unwrap(), "--train", "25"], dir.path());

    let first = run("a");
    assert!(first.status.success(), "{}", stderr(&first));
    let manifest = RunManifest::load(dir.path().join("a/manifest.json")).unwrap();
    assert_eq!(manifest.train_prefix, 25);
    assert_eq!(manifest.snapshots.len(), 5);
    assert_eq!(manifest.universe.len(), 8);
    for record in &manifest.snapshots {
        assert_eq!(record.reports.len(), 3);
        for file in record.reports.values() {
            assert!(dir.path().join("a").join(file).exists());
        }
    }

    let second = run("b");
    assert!(second.status.success());
    for record in &manifest.snapshots {
        for file in record.reports.values() {
            let a = fs::read(dir.path().join("a").join(file)).unwrap();
            let b = fs::read(dir.path().join("b").join(file)).unwrap();
            assert_eq!(a, b, "{file} differs between identical runs");
        }
    }
}

#[test]
fn detectors_flag_restricts_reports() {
    let dir = tempfile::tempdir().unwrap();
    let seq = common::write_sequence(dir.path(), 12, 3);
    let cfg = write_config(dir.path(), "mc_samples = 50\n");
    let out = gbter(
        &["--config", &cfg, "--detectors", "stats", "stream", seq.to_str().unwrap(), "--train", "10"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let manifest = RunManifest::load(dir.path().join("gbter-out/manifest.json")).unwrap();
    assert!(manifest.snapshots.iter().all(|r| r.reports.len() == 1));
}

#[test]
fn missing_input_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = gbter(&["fit", "no-such-sequence.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no-such-sequence.json"), "{}", stderr(&out));
}

#[test]
fn training_on_everything_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let seq = common::write_sequence(dir.path(), 6, 4);
    let out = gbter(&["stream", seq.to_str().unwrap(), "--train", "6"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("nothing to detect"), "{}", stderr(&out));
    let out = gbter(&["stream", seq.to_str().unwrap(), "--train", "0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(gbter(&["experiment", "3"], dir.path()).status.code(), Some(1));
    assert_eq!(gbter(&["stream", "x.json"], dir.path()).status.code(), Some(1));
    assert_eq!(gbter(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(gbter(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn bad_config_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let seq = common::write_sequence(dir.path(), 6, 5);
    let cfg = write_config(dir.path(), "seed = 1\n\nmc_samples = \"many\"\n");
    let out = gbter(&["--config", &cfg, "fit", seq.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    let out = gbter(&["--detectors", "spectral", "fit", seq.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_sequence_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, r#"{"universe": ["a", "b"], "snapshots": [{"t": 0, "edges": [["a", "z"]]}]}"#).unwrap();
    let out = gbter(&["fit", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("broken.json"), "{}", stderr(&out));
}
