use std::collections::BTreeMap;
use std::path::Path;

use sgalab_cli::{run, Experiment, ExperimentConfig, RunOptions, Settings};

fn outputs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect()
}

fn run_at(cfg: &ExperimentConfig, threads: usize) -> BTreeMap<String, Vec<u8>> {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        threads,
        out_dir: dir.path().to_path_buf(),
    };
    run(cfg, &opts).unwrap();
    outputs(dir.path())
}

fn config(experiment: Experiment, doc: &str) -> ExperimentConfig {
    ExperimentConfig::from_settings(experiment, &Settings::from_toml(doc).unwrap()).unwrap()
}

fn assert_thread_independent(experiment: Experiment, doc: &str) {
    let cfg = config(experiment, doc);
    let one = run_at(&cfg, 1);
    let eight = run_at(&cfg, 8);
    let again = run_at(&cfg, 8);
    assert!(!one.is_empty());
    assert_eq!(one, eight, "{}", experiment.name());
    assert_eq!(eight, again, "{}", experiment.name());
}

#[test]
fn regime_outputs_do_not_depend_on_threads() {
    assert_thread_independent(
        Experiment::Disordered,
        "pi = 0.8\nm = 32\np_c = 0.1\nreplicas = 60\nseed = 5\n",
    );
    assert_thread_independent(
        Experiment::Quasispecies,
        "pi = 1.5\nm = 32\np_c = 0.1\nreplicas = 60\nseed = 5\n",
    );
    assert_thread_independent(
        Experiment::Sweep,
        "pis = [0.7, 1.2]\nm = 16\np_c = 0.1\nreplicas = 40\nseed = 5\n",
    );
}

#[test]
fn dominance_outputs_do_not_depend_on_threads() {
    assert_thread_independent(
        Experiment::DominanceTn,
        "pi = 0.8\nm = 16\np_c = 0.1\nreplicas = 200\nhorizon = 5\nseed = 5\n",
    );
    assert_thread_independent(
        Experiment::DominanceNstar,
        "pi = 0.8\nm = 16\np_c = 0.1\neps = 0.04\nreplicas = 200\nhorizon = 5\nseed = 5\n",
    );
    assert_thread_independent(
        Experiment::DominanceOnestep,
        "pi = 1.3\nm = 6\nell = 4\np_c = 0.1\nsamples = 500\nbatch = 200\nmax_batches = 5\nseed = 5\n",
    );
}

#[test]
fn process_outputs_do_not_depend_on_threads() {
    assert_thread_independent(
        Experiment::Gw,
        "law = \"scaled_poisson\"\nscale = 2\nlambda = 4.0\nreplicas = 300\nseed = 5\n",
    );
    assert_thread_independent(
        Experiment::Lowerchain,
        "pi = 1.3\nm = 6\nell = 4\np_c = 0.1\nreplicas = 300\nseed = 5\n",
    );
    assert_thread_independent(
        Experiment::Tune,
        "m = 16\np_c = 0.1\np_m = 0.02\nhorizon = 8\nseed = 5\n",
    );
}

#[test]
fn csv_files_carry_schema_and_config() {
    let cfg = config(
        Experiment::Disordered,
        "pi = 0.8\nm = 16\np_c = 0.1\nreplicas = 4\nseed = 2\n",
    );
    let files = run_at(&cfg, 2);
    let names: Vec<&String> = files.keys().collect();
    assert_eq!(names, ["events.csv", "summary.json", "trajectories.csv"]);
    for (name, bytes) in &files {
        let text = String::from_utf8(bytes.clone()).unwrap();
        if name.ends_with(".csv") {
            let mut lines = text.lines();
            assert!(lines.next().unwrap().starts_with("# schema: sgalab/"));
            assert_eq!(lines.next().unwrap(), format!("# config: {}", cfg.echo()));
        } else {
            let v: serde_json::Value = serde_json::from_str(&text).unwrap();
            assert_eq!(v["schema"], "sgalab/summary/1");
            assert_eq!(v["config"]["seed"], 2);
        }
    }
    let traj = String::from_utf8(files["trajectories.csv"].clone()).unwrap();
    assert_eq!(
        traj.lines().nth(2).unwrap(),
        "replica,gen,f_star,f_bar,n_master,n_descendants,d_max"
    );
    // 4 replicas, generations 0..=ceil(2 ln 16) = 6.
    assert_eq!(traj.lines().count(), 3 + 4 * 7);
}
