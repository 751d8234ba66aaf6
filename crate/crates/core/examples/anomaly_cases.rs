//! Clustered, scattered and novel anomalies on the two-dimensional cases.
//!
//! Each case is trained with 30 labeled anomalies and a 2% contaminated
//! unlabeled pool, over five seeds. Run with
//! `cargo run --release --example anomaly_cases [rows]`.

use std::time::Instant;

use rosas::data::{generate_case, CaseKind};
use rosas::eval;
use rosas::protocol::{prepare_train_test, ProtocolConfig};
use rosas::trainer::{self, TrainConfig};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn main() -> rosas::Result<()> {
    let rows: usize = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(2000);
    let protocol = ProtocolConfig::default();
    for kind in [CaseKind::Clustered, CaseKind::Scattered, CaseKind::Novel] {
        let started = Instant::now();
        let (mut rocs, mut prs) = (Vec::new(), Vec::new());
        for seed in 0..5 {
            let (train, test) = generate_case(kind, rows, seed)?;
            let prepared = prepare_train_test(train, test, &protocol, seed)?;
            let config = TrainConfig {
                seed,
                ..TrainConfig::default()
            };
            let (scorer, _) = trainer::train(&prepared, &config)?;
            let test = prepared.test_view();
            let scores = trainer::predict(&scorer, test.features.view())?;
            let report = eval::evaluate(scores.as_slice().unwrap(), &test.labels)?;
            rocs.push(report.auc_roc);
            prs.push(report.auc_pr);
        }
        println!(
            "{kind:<10} median AUC-ROC {:.4}  median AUC-PR {:.4}  ({:.1}s)",
            median(rocs),
            median(prs),
            started.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
