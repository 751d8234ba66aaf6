//! Train on synthetic toy data and report held-out metrics.
//!
//! `cargo run --release --example quickstart`

use rosas::data::{generate_toy, ToyConfig};
use rosas::eval;
use rosas::protocol::{prepare, ProtocolConfig};
use rosas::trainer::{self, TrainConfig};

fn main() -> rosas::Result<()> {
    let toy = generate_toy(&ToyConfig::new(3000), 7);
    // Split, pick 30 labeled anomalies, set 2% contamination, normalize.
    let prepared = prepare(toy.dataset, &ProtocolConfig::default(), 7)?;
    let config = TrainConfig {
        epochs: 20,
        seed: 7,
        ..TrainConfig::default()
    };
    let (scorer, history) = trainer::train_with_progress(&prepared, &config, |record| {
        if record.epoch % 5 == 0 {
            println!(
                "epoch {:>3}  scoring {:.4}  regularizer {:.4}  w {:.3}  valid AUC-PR {:.4}",
                record.epoch,
                record.mean_scoring,
                record.mean_regularizer.unwrap_or(f64::NAN),
                record.mean_weight,
                record.valid_auc_pr.unwrap_or(f64::NAN)
            );
        }
    })?;
    let test = prepared.test_view();
    let scores = trainer::predict_owned(&scorer, &test.features)?;
    let report = eval::evaluate(&scores, &test.labels)?;
    println!("kept epoch {:?}", history.selected_epoch);
    println!(
        "test AUC-ROC {:.4}  AUC-PR {:.4}  ({} anomalies / {} normals)",
        report.auc_roc, report.auc_pr, report.n_pos, report.n_neg
    );
    Ok(())
}
