//! Ranking metrics on a hand-sized example, including ties.
//!
//! `cargo run --release --example metrics`

use rosas::eval::{auc_pr, auc_roc, evaluate};

fn main() -> rosas::Result<()> {
    let scores = [0.9, 0.8, 0.7, 0.1];
    let labels = [1, 0, 1, 0];
    println!(
        "AUC-ROC {:.4}  (3 of 4 anomaly/normal pairs ordered correctly)",
        auc_roc(&scores, &labels)?
    );
    println!(
        "AUC-PR  {:.4}  (precision 1 at the first hit, 2/3 at the second)",
        auc_pr(&scores, &labels)?
    );

    let tied = [0.5, 0.5, 0.5, 0.1];
    println!(
        "with a three-way tie: AUC-ROC {:.4}  AUC-PR {:.4}",
        auc_roc(&tied, &labels)?,
        auc_pr(&tied, &labels)?
    );

    let report = evaluate(&scores, &labels)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
