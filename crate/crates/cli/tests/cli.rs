use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gnl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gnl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("exp.toml");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn run_dir(stdout: &str) -> std::path::PathBuf {
    stdout.lines().next().unwrap().into()
}

const BLOBS: &str = r#"
dataset.name = "synthetic"
dataset.synthetic.generator = "blobs"
dataset.synthetic.n = 120
dataset.synthetic.dim = 4
dataset.synthetic.classes = 3
learner.name = "perceptron"
strategy = "margin"
cutoff = 100
timing = "off"
"#;

#[test]
fn one_learner_one_strategy_five_seeds_gives_five_trajectories_and_one_aggregate() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), BLOBS);
    let out = tmp.path().join("runs");
    let o = gnl(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = run_dir(&stdout(&o));
    assert_eq!(fs::read_dir(dir.join("trajectories")).unwrap().count(), 5);
    assert_eq!(fs::read_dir(dir.join("aggregates")).unwrap().count(), 1);
    let agg = fs::read_to_string(dir.join("aggregates/perceptron__margin.csv")).unwrap();
    assert_eq!(agg.lines().count(), 101);
    assert_eq!(agg.lines().next().unwrap(), "step,mean_error,stderr,n_seeds");
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    let entry = &summary[0];
    for key in [
        "learner",
        "strategy",
        "track",
        "seed_list",
        "n",
        "mean_final_error",
        "stderr_final_error",
    ] {
        assert!(entry.get(key).is_some(), "missing {key}");
    }
    assert_eq!(entry["seed_list"], serde_json::json!([0, 1, 2, 3, 4]));
    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["complete"], Value::Bool(true));
}

#[test]
fn rerun_is_byte_identical_and_lands_in_the_same_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), BLOBS);
    let out = tmp.path().join("runs");
    let a = gnl(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let dir = run_dir(&stdout(&a));
    let first = fs::read(dir.join("trajectories/perceptron__margin__seed3.csv")).unwrap();
    let b = gnl(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--parallel"]);
    assert_eq!(run_dir(&stdout(&b)), dir);
    assert_eq!(
        fs::read(dir.join("trajectories/perceptron__margin__seed3.csv")).unwrap(),
        first
    );

    // A different seed list is a different config and a different directory.
    let c = gnl(&[
        "run",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--seeds",
        "0,1",
    ]);
    assert_ne!(run_dir(&stdout(&c)), dir);
    assert_eq!(
        fs::read_dir(run_dir(&stdout(&c)).join("trajectories")).unwrap().count(),
        2
    );
}

#[test]
fn batch_of_fifty_over_ten_thousand_fits_two_hundred_times() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"
dataset.name = "synthetic"
dataset.synthetic.generator = "blobs"
dataset.synthetic.n = 10000
dataset.synthetic.dim = 2
dataset.synthetic.classes = 2
learner.name = "perceptron"
track.mode = "batch"
track.k = 50
seeds = [0]
cutoff = 300
timing = "off"
"#,
    );
    let o = gnl(&[
        "run",
        "--config",
        &cfg,
        "--out",
        tmp.path().join("runs").to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(run_dir(&stdout(&o)).join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["episodes"][0]["batch_fits"], 200);
    assert_eq!(manifest["track"], "SB50");
}

#[test]
fn invalid_config_exits_nonzero_with_field_path() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &format!("{BLOBS}track.k = 5\n"));
    let o = gnl(&["run", "--config", &cfg]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("track.k"));

    let cfg = write_config(tmp.path(), &BLOBS.replace("\"margin\"", "\"sideways\""));
    let o = gnl(&["run", "--config", &cfg]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("strateg"));
}

#[test]
fn missing_data_files_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "dataset.name = \"mnist\"\ndataset.path = \"nowhere\"\nlearner.name = \"knn\"\n",
    );
    let o = gnl(&["run", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("MNIST"));
}

#[test]
fn oracle_defaults_and_trial_scaling() {
    let o = gnl(&["oracle"]);
    assert!(o.status.success());
    let big: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(big["band"], serde_json::json!([7, 12]));
    assert!((big["mc_mean"].as_f64().unwrap() - 7.07).abs() < 0.02);

    let small: Value = serde_json::from_str(&stdout(&gnl(&["oracle", "--trials", "10"]))).unwrap();
    let ratio = small["mc_stderr"].as_f64().unwrap() / big["mc_stderr"].as_f64().unwrap();
    // 1/sqrt(trials) scaling predicts 100; ten trials give a rough variance estimate.
    assert!((30.0..300.0).contains(&ratio), "{ratio}");

    let one: Value = serde_json::from_str(&stdout(&gnl(&["oracle", "--classes", "1", "--trials", "100"]))).unwrap();
    assert_eq!(one["band"], serde_json::json!([0, 0]));

    assert!(!gnl(&["oracle", "--boundary", "4,2"]).status.success());
}

#[test]
fn ablation_emits_one_curve_per_k_and_rejects_k_one() {
    let tmp = tempfile::tempdir().unwrap();
    let body = BLOBS.replace(
        "strategy = \"margin\"",
        "strategy = \"entropy\"\ntrack.mode = \"batch\"\ntrack.k = 10",
    );
    let cfg = write_config(tmp.path(), &body);
    let out = tmp.path().join("runs");
    let o = gnl(&[
        "ablation",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--k",
        "10,50,120",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = run_dir(&stdout(&o));
    let comparison = fs::read_to_string(dir.join("comparison.csv")).unwrap();
    assert_eq!(comparison.lines().count(), 4);
    for k in ["K10", "K50", "K120"] {
        assert!(dir.join(k).join("aggregates/perceptron__entropy.csv").exists());
    }
    // K = N: one terminal fit, every prediction made cold.
    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.join("K120/manifest.json")).unwrap()).unwrap();
    assert!(manifest["episodes"]
        .as_array()
        .unwrap()
        .iter()
        .all(|e| e["batch_fits"] == 1));

    let toggled = gnl(&[
        "ablation",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--k",
        "20",
        "--toggle-reset",
    ]);
    assert!(toggled.status.success());
    assert_eq!(stdout(&toggled).lines().count(), 4);

    let bad = gnl(&[
        "ablation",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--k",
        "1,10",
    ]);
    assert!(!bad.status.success());

    let online = write_config(tmp.path(), BLOBS);
    assert!(!gnl(&["ablation", "--config", &online, "--k", "10"]).status.success());
}

#[test]
fn fixtures_feed_back_into_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let fx = tmp.path().join("fx");
    let o = gnl(&["fixtures", "--out", fx.to_str().unwrap(), "--n", "200", "--dim", "6"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 5);
    let runs = tmp.path().join("runs");
    for (name, path, extra) in [
        ("embeddings", fx.join("embeddings.glemb"), ""),
        ("embeddings", fx.join("margin.glemb"), ""),
        ("mnist", fx.join("idx"), ""),
        ("agnews", fx.join("agnews.csv"), "dataset.hash_dim = 1024\n"),
    ] {
        let cfg = write_config(
            tmp.path(),
            &format!(
                "dataset.name = \"{name}\"\ndataset.path = \"{}\"\n{extra}learner.name = [\"knn\", \"softmax_head\"]\nstrategy = \"least_confidence\"\nseeds = [0, 1]\ncutoff = 150\n",
                path.display()
            ),
        );
        let o = gnl(&["run", "--config", &cfg, "--out", runs.to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(run_dir(&stdout(&o)).join("cost_performance.csv").exists());
    }
}
