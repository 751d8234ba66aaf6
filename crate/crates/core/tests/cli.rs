//! End-to-end runs of the `rosas` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn rosas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rosas"))
        .args(args)
        .env_remove("ROSAS_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn error_kind(out: &Output) -> String {
    assert!(!out.status.success());
    let record: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim())
            .expect("stderr is a JSON error record");
    record["error"].as_str().unwrap().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth_toy(dir: &Path, n: usize) -> PathBuf {
    ok(&rosas(&[
        "synthesize",
        "--kind",
        "toy",
        "--n",
        &n.to_string(),
        "--seed",
        "3",
        "--out",
        s(dir),
    ]));
    dir.join("toy.csv")
}

fn train(data: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "train",
        "--data",
        s(data),
        "--epochs",
        "3",
        "--batches-per-epoch",
        "5",
        "--out",
        s(out),
    ];
    if !extra.contains(&"--seed") {
        args.extend(["--seed", "9"]);
    }
    args.extend_from_slice(extra);
    rosas(&args)
}

#[test]
fn train_evaluate_score_round_trip() {
    let tmp = TempDir::new().unwrap();
    let data = synth_toy(tmp.path(), 1500);
    let run = tmp.path().join("run");
    ok(&train(&data, &run, &[]));
    for file in [
        "model.rosas",
        "history.json",
        "test.csv",
        "train.manifest.json",
    ] {
        assert!(run.join(file).exists(), "{file} missing");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run.join("train.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);

    let eval_dir = tmp.path().join("eval");
    let model = run.join("model.rosas");
    let test = run.join("test.csv");
    let first = ok(&rosas(&[
        "evaluate",
        "--model",
        s(&model),
        "--data",
        s(&test),
        "--out",
        s(&eval_dir),
    ]));
    let second = ok(&rosas(&[
        "evaluate",
        "--model",
        s(&model),
        "--data",
        s(&test),
        "--out",
        s(&eval_dir),
    ]));
    assert_eq!(first, second);
    let report: serde_json::Value = serde_json::from_str(first.trim()).unwrap();
    for key in ["auc_roc", "auc_pr"] {
        let v = report[key].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&v));
    }
    // Evaluating the held-out split reproduces the metrics recorded at training time.
    assert_eq!(report["auc_roc"], manifest["metrics"]["auc_roc"]);
    assert_eq!(report["auc_pr"], manifest["metrics"]["auc_pr"]);
    assert!(eval_dir.join("evaluate.manifest.json").exists());

    let scores_path = tmp.path().join("scores.csv");
    ok(&rosas(&[
        "score",
        "--model",
        s(&model),
        "--data",
        s(&test),
        "--output",
        s(&scores_path),
        "--out",
        s(&eval_dir),
    ]));
    let text = fs::read_to_string(&scores_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let n_rows = fs::read_to_string(&test).unwrap().lines().count() - 1;
    assert_eq!(lines[0], "row,score");
    assert_eq!(lines.len() - 1, n_rows);
    for (i, line) in lines[1..].iter().enumerate() {
        let (row, score) = line.split_once(',').unwrap();
        assert_eq!(row.parse::<usize>().unwrap(), i);
        let score: f64 = score.parse().unwrap();
        assert!(score > -1.0 && score < 1.0);
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let data = synth_toy(tmp.path(), 1200);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&train(&data, &a, &[]));
    ok(&train(&data, &b, &[]));
    for file in ["model.rosas", "history.json", "test.csv"] {
        assert_eq!(
            fs::read(a.join(file)).unwrap(),
            fs::read(b.join(file)).unwrap(),
            "{file} differs"
        );
    }
    let c = tmp.path().join("c");
    ok(&train(&data, &c, &["--seed", "10"]));
    assert_ne!(
        fs::read(a.join("model.rosas")).unwrap(),
        fs::read(c.join("model.rosas")).unwrap()
    );
}

#[test]
fn zero_labeled_anomalies_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let data = synth_toy(tmp.path(), 500);
    let run = tmp.path().join("run");
    let out = train(&data, &run, &["--labeled-anomalies", "0"]);
    assert_eq!(error_kind(&out), "invalid_parameter");
    assert!(!run.join("model.rosas").exists());
}

#[test]
fn bad_inputs_surface_as_error_records() {
    let tmp = TempDir::new().unwrap();
    let data = synth_toy(tmp.path(), 800);
    let run = tmp.path().join("run");
    ok(&train(&data, &run, &[]));
    let model = run.join("model.rosas");

    // Missing label column.
    let unlabeled = tmp.path().join("unlabeled.csv");
    fs::write(&unlabeled, "a,b\n1,2\n").unwrap();
    let out = rosas(&[
        "evaluate",
        "--model",
        s(&model),
        "--data",
        s(&unlabeled),
        "--out",
        s(tmp.path()),
    ]);
    assert_eq!(error_kind(&out), "load_error");

    // Width mismatch.
    let out = rosas(&[
        "score",
        "--model",
        s(&model),
        "--data",
        s(&unlabeled),
        "--out",
        s(tmp.path()),
    ]);
    assert_eq!(error_kind(&out), "shape_mismatch");

    // Unknown ablation mode.
    let out = train(&data, &run, &["--ablation", "bogus"]);
    assert!(!out.status.success());

    // Corrupted model.
    let text = fs::read_to_string(&model).unwrap();
    let truncated = tmp.path().join("truncated.rosas");
    fs::write(&truncated, &text[..text.len() / 3]).unwrap();
    let out = rosas(&[
        "score",
        "--model",
        s(&truncated),
        "--data",
        s(&run.join("test.csv")),
        "--out",
        s(tmp.path()),
    ]);
    assert_eq!(error_kind(&out), "corrupt_artifact");
}

#[test]
fn empty_score_input_gives_header_only() {
    let tmp = TempDir::new().unwrap();
    let data = synth_toy(tmp.path(), 800);
    let run = tmp.path().join("run");
    ok(&train(&data, &run, &[]));
    let header = fs::read_to_string(&data)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    let empty = tmp.path().join("empty.csv");
    fs::write(&empty, format!("{header}\n")).unwrap();
    let output = tmp.path().join("empty-scores.csv");
    ok(&rosas(&[
        "score",
        "--model",
        s(&run.join("model.rosas")),
        "--data",
        s(&empty),
        "--output",
        s(&output),
        "--out",
        s(tmp.path()),
    ]));
    assert_eq!(fs::read_to_string(output).unwrap(), "row,score\n");
}

#[test]
fn out_dir_defaults_to_environment() {
    let tmp = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_rosas"))
        .args(["synthesize", "--kind", "clustered", "--n", "200"])
        .env("ROSAS_OUT_DIR", tmp.path())
        .output()
        .unwrap();
    ok(&out);
    assert!(tmp.path().join("clustered-train.csv").exists());
    assert!(tmp.path().join("clustered-test.csv").exists());
    assert!(tmp.path().join("synthesize.manifest.json").exists());
}

#[test]
fn config_file_is_honoured_and_flags_override_it() {
    let tmp = TempDir::new().unwrap();
    let data = synth_toy(tmp.path(), 800);
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "[train]\nepochs = 1\nbatches_per_epoch = 2\nrep_dim = 16\n[protocol]\nlabeled_anomalies = 5\n").unwrap();
    let run = tmp.path().join("run");
    ok(&rosas(&[
        "train",
        "--data",
        s(&data),
        "--config",
        s(&cfg),
        "--epochs",
        "2",
        "--out",
        s(&run),
    ]));
    let history: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run.join("history.json")).unwrap()).unwrap();
    assert_eq!(history["epochs"].as_array().unwrap().len(), 2);
    let model = fs::read_to_string(run.join("model.rosas")).unwrap();
    assert!(model.lines().any(|l| l == "rep_dim 16"));
}

#[test]
fn sweep_grid_and_edge_cases() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("sweep");
    ok(&rosas(&[
        "sweep",
        "--contamination",
        "0,0.02,0.04,0.08",
        "--repeats",
        "3",
        "--toy-rows",
        "3000",
        "--epochs",
        "1",
        "--out",
        s(&out),
    ]));
    let text = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "setting_kind,setting_value,repeat,seed,auc_pr,auc_roc,status"
    );
    assert_eq!(lines.len(), 13);
    assert!(lines[1..].iter().all(|l| l.ends_with(",ok")), "{text}");

    // Infeasible budget is recorded in its row, not fatal.
    let out = tmp.path().join("budget");
    ok(&rosas(&[
        "sweep",
        "--budgets",
        "5,100000",
        "--toy-rows",
        "3000",
        "--epochs",
        "1",
        "--out",
        s(&out),
    ]));
    let text = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].ends_with(",ok"));
    assert!(lines[2].contains("unusable_dataset"));

    // Empty grid.
    let out = tmp.path().join("empty");
    ok(&rosas(&["sweep", "--out", s(&out)]));
    let text = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(out.join("sweep.manifest.json").exists());
}
