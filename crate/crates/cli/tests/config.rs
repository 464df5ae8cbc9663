use std::process::Command;

use sgalab_cli::{Experiment, ExperimentConfig, Settings};

const MINIMAL: &str = "pi = 0.8\nm = 128\np_c = 0.1\nreplicas = 100\nseed = 42\n";

fn sgalab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sgalab"))
}

#[test]
fn minimal_disordered_config_round_trips() {
    let settings = Settings::from_toml(MINIMAL).unwrap();
    let cfg = ExperimentConfig::from_settings(Experiment::Disordered, &settings).unwrap();
    let text = cfg.to_toml();
    let again = ExperimentConfig::from_settings(
        Experiment::Disordered,
        &Settings::from_toml(&text).unwrap(),
    )
    .unwrap();
    assert_eq!(cfg, again);
    assert_eq!(
        cfg.echo(),
        r#"{"experiment":"disordered","pi":0.8,"m":128,"p_c":0.1,"kappa":2.0,"replicas":100,"seed":42}"#
    );
}

#[test]
fn disordered_pi_above_twice_keep_rate_is_rejected() {
    let s = Settings::from_toml("pi = 1.9\nm = 128\np_c = 0.1\nseed = 42\n").unwrap();
    let err = ExperimentConfig::from_settings(Experiment::Disordered, &s).unwrap_err();
    assert_eq!(err.field(), Some("pi"));
    assert!(err.to_string().contains("2 (1 - p_c) = 1.8"), "{err}");
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn missing_seed_is_rejected() {
    let s = Settings::from_toml("pi = 0.8\nm = 128\np_c = 0.1\n").unwrap();
    let err = ExperimentConfig::from_settings(Experiment::Disordered, &s).unwrap_err();
    assert_eq!(err.field(), Some("seed"));
}

#[test]
fn keys_of_other_experiments_are_rejected() {
    let s = Settings::from_toml(&format!("{MINIMAL}eps = 0.1\n")).unwrap();
    let err = ExperimentConfig::from_settings(Experiment::Disordered, &s).unwrap_err();
    assert_eq!(err.field(), Some("eps"));
}

#[test]
fn quasispecies_needs_a_reachable_pi() {
    let s = Settings::from_toml("pi = 1.9\nm = 16\np_c = 0.1\nseed = 1\n").unwrap();
    let err = ExperimentConfig::from_settings(Experiment::Quasispecies, &s).unwrap_err();
    assert_eq!(err.field(), Some("pi"));
    let s = Settings::from_toml("pi = 0.9\nm = 16\np_c = 0.1\nseed = 1\n").unwrap();
    assert!(ExperimentConfig::from_settings(Experiment::Quasispecies, &s).is_err());
}

#[test]
fn odd_population_is_rejected() {
    let s = Settings::from_toml("pi = 0.8\nm = 7\np_c = 0.1\nseed = 1\n").unwrap();
    let err = ExperimentConfig::from_settings(Experiment::Disordered, &s).unwrap_err();
    assert_eq!(err.field(), Some("m"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = sgalab()
        .args([
            "disordered",
            "--pi",
            "0.8",
            "--m",
            "16",
            "--p-c",
            "0.1",
            "--replicas",
            "5",
            "--seed",
            "1",
        ])
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(dir.path().join("events.csv").exists());

    let bad = sgalab()
        .args([
            "disordered",
            "--pi",
            "1.9",
            "--m",
            "16",
            "--p-c",
            "0.1",
            "--seed",
            "1",
        ])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("`pi`"));

    let unknown_flag = sgalab().args(["gw", "--wat", "1"]).output().unwrap();
    assert_eq!(unknown_flag.status.code(), Some(1));

    let help = sgalab().arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));

    // The output directory is a regular file, so writing fails after a valid run.
    let file = dir.path().join("occupied");
    std::fs::write(&file, "x").unwrap();
    let runtime = sgalab()
        .args([
            "gw",
            "--law",
            "poisson",
            "--lambda",
            "0.5",
            "--replicas",
            "10",
            "--seed",
            "1",
        ])
        .arg("--out-dir")
        .arg(&file)
        .output()
        .unwrap();
    assert_eq!(runtime.status.code(), Some(2));
}

#[test]
fn flags_override_the_document() {
    let dir = tempfile::tempdir().unwrap();
    let doc = dir.path().join("run.toml");
    std::fs::write(
        &doc,
        "pi = 0.8\nm = 16\np_c = 0.1\nreplicas = 5\nseed = 1\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = sgalab()
        .arg("disordered")
        .arg("--config")
        .arg(&doc)
        .args(["--replicas", "3"])
        .arg("--out-dir")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let events = std::fs::read_to_string(out.join("events.csv")).unwrap();
    assert!(events.lines().nth(1).unwrap().contains("\"replicas\":3"));
    assert_eq!(events.lines().count(), 3 + 3);
}

#[test]
fn environment_sets_the_default_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let status = sgalab()
        .args([
            "gw",
            "--law",
            "poisson",
            "--lambda",
            "0.5",
            "--replicas",
            "10",
            "--horizon",
            "5",
            "--seed",
            "1",
        ])
        .env(sgalab_cli::OUT_DIR_ENV, dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("survival.csv").exists());
}
