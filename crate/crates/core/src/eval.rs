//! Ranking metrics.
//!
//! AUC-ROC is the Mann–Whitney statistic with half credit for ties. AUC-PR
//! is step-wise average precision: `Σ ΔRecall · Precision` over descending
//! distinct score thresholds, with tied scores entering as one block. No
//! linear interpolation between PR points.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub auc_roc: f64,
    pub auc_pr: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "AUC-ROC {:.4}  AUC-PR {:.4}  ({} anomalies / {} normal)",
            self.auc_roc, self.auc_pr, self.n_pos, self.n_neg
        )
    }
}

fn counts(scores: &[f64], labels: &[u8]) -> Result<(usize, usize)> {
    check_dim("metric labels", scores.len(), labels.len())?;
    if let Some(bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::InvalidParameter(format!(
            "labels must be 0 or 1, found {bad}"
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::UndefinedMetric("NaN score".into()));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    Ok((pos, labels.len() - pos))
}

/// `(positives, negatives)` per block of equal score, highest score first.
fn sorted_blocks(scores: &[f64], labels: &[u8]) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal));
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut previous: Option<f64> = None;
    for i in order {
        if previous != Some(scores[i]) {
            blocks.push((0, 0));
            previous = Some(scores[i]);
        }
        let block = blocks.last_mut().expect("pushed above");
        if labels[i] == 1 {
            block.0 += 1;
        } else {
            block.1 += 1;
        }
    }
    blocks
}

pub fn auc_roc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (n_pos, n_neg) = counts(scores, labels)?;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric(
            "AUC-ROC needs at least one anomaly and one normal row".into(),
        ));
    }
    // Walking from the highest score down, every positive in a block beats
    // all negatives below it and ties with the negatives inside the block.
    let mut negatives_below = n_neg as f64;
    let mut wins = 0.0;
    for (pos, neg) in sorted_blocks(scores, labels) {
        negatives_below -= neg as f64;
        wins += pos as f64 * (negatives_below + 0.5 * neg as f64);
    }
    Ok(wins / (n_pos as f64 * n_neg as f64))
}

pub fn auc_pr(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (n_pos, _) = counts(scores, labels)?;
    if n_pos == 0 {
        return Err(Error::UndefinedMetric(
            "AUC-PR needs at least one anomaly".into(),
        ));
    }
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut ap = 0.0;
    for (pos, neg) in sorted_blocks(scores, labels) {
        tp += pos;
        fp += neg;
        if pos > 0 {
            let precision = tp as f64 / (tp + fp) as f64;
            ap += (pos as f64 / n_pos as f64) * precision;
        }
    }
    Ok(ap)
}

pub fn evaluate(scores: &[f64], labels: &[u8]) -> Result<MetricsReport> {
    let (n_pos, n_neg) = counts(scores, labels)?;
    Ok(MetricsReport {
        auc_roc: auc_roc(scores, labels)?,
        auc_pr: auc_pr(scores, labels)?,
        n_pos,
        n_neg,
    })
}
