//! Robustness to anomaly contamination of the unlabeled pool, via the sweep
//! command. Writes `sweep.csv` under the system temp directory.
//!
//! `cargo run --release --example contamination_sweep [repeats]`

use std::collections::BTreeMap;

use rosas::cli::{cmd_sweep, RunConfig, SweepRequest};

fn main() -> rosas::Result<()> {
    let repeats = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(3);
    let out = std::env::temp_dir().join("rosas-contamination-sweep");
    let mut config = RunConfig::default();
    config.train.epochs = 20;
    let rows = cmd_sweep(&SweepRequest {
        data: None,
        toy_rows: 5000,
        label_column: "label".into(),
        contamination_levels: vec![0.0, 0.02, 0.04, 0.08],
        labeled_budgets: vec![10, 30, 90],
        repeats,
        config,
        out: out.clone(),
    })?;

    let mut cells: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for row in &rows {
        if let Some(pr) = row.auc_pr {
            cells
                .entry((
                    row.setting_kind.clone(),
                    format!("{:>5}", row.setting_value),
                ))
                .or_default()
                .push(pr);
        } else {
            println!("{} {}: {}", row.setting_kind, row.setting_value, row.status);
        }
    }
    for ((kind, value), prs) in cells {
        let mean = prs.iter().sum::<f64>() / prs.len() as f64;
        println!(
            "{kind:<14} {value}  mean AUC-PR {mean:.4}  over {} runs",
            prs.len()
        );
    }
    println!("table: {}", out.join("sweep.csv").display());
    Ok(())
}
