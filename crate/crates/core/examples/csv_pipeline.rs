//! Train, persist, reload and score through the file-based commands.
//! Everything is written under the system temp directory.
//!
//! `cargo run --release --example csv_pipeline`

use rosas::cli::{
    self, EvaluateRequest, RunConfig, ScoreRequest, SynthKind, SynthesizeRequest, TrainRequest,
};
use rosas::data::CaseKind;

fn main() -> rosas::Result<()> {
    let out = std::env::temp_dir().join("rosas-csv-pipeline");
    let files = cli::cmd_synthesize(&SynthesizeRequest {
        kind: SynthKind::Case(CaseKind::Scattered),
        n: 2000,
        anomaly_fraction: None,
        seed: 5,
        label_column: "label".into(),
        out: out.clone(),
    })?;
    println!("wrote {files:?}");

    let mut config = RunConfig::default();
    config.train.epochs = 20;
    let trained = cli::cmd_train(&TrainRequest {
        data: out.join("scattered-train.csv"),
        label_column: "label".into(),
        test_data: Some(out.join("scattered-test.csv")),
        out: out.join("run"),
        config,
    })?;
    println!(
        "train manifest config hash {}",
        trained.manifest.config_hash
    );

    let model = out.join("run").join(cli::MODEL_FILE);
    let (report, _) = cli::cmd_evaluate(&EvaluateRequest {
        model: model.clone(),
        data: out.join("run").join(cli::TEST_SPLIT_FILE),
        label_column: "label".into(),
        out: out.join("eval"),
    })?;
    println!(
        "reloaded model: AUC-ROC {:.4}  AUC-PR {:.4}",
        report.auc_roc, report.auc_pr
    );

    let (scores, _) = cli::cmd_score(&ScoreRequest {
        model,
        data: out.join("scattered-test.csv"),
        label_column: Some("label".into()),
        output: out.join("scores.csv"),
        out: out.join("score"),
    })?;
    let top = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!(
        "scored {} rows, highest score {top:.4}; see {}",
        scores.len(),
        out.join("scores.csv").display()
    );
    Ok(())
}
