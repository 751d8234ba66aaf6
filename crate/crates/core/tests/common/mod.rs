//! Test-side reference implementations. Deliberately naive: scalar loops
//! over the raw weight arrays, no shared code with the library's forward,
//! loss or metric paths.

#![allow(dead_code)]

pub mod gradcheck;

use ndarray::{Array1, Array2};
use rosas::losses::{AblationMode, MiniBatch};
use rosas::scorer::Scorer;
use rosas::supervision::AugmentedSample;

pub fn dense(w: &Array2<f64>, b: &Array1<f64>, x: &[f64]) -> Vec<f64> {
    (0..w.nrows())
        .map(|o| b[o] + (0..w.ncols()).map(|i| w[[o, i]] * x[i]).sum::<f64>())
        .collect()
}

pub fn leaky(v: Vec<f64>, slope: f64) -> Vec<f64> {
    v.into_iter()
        .map(|z| if z >= 0.0 { z } else { slope * z })
        .collect()
}

pub fn represent(s: &Scorer, x: &[f64]) -> Vec<f64> {
    let p = &s.params;
    let h = leaky(dense(&p.rep_hidden.weights, &p.rep_hidden.bias, x), s.slope);
    dense(&p.rep_out.weights, &p.rep_out.bias, &h)
}

pub fn score(s: &Scorer, x: &[f64]) -> f64 {
    let p = &s.params;
    let r = represent(s, x);
    let g = leaky(
        dense(&p.score_hidden.weights, &p.score_hidden.bias, &r),
        s.slope,
    );
    dense(&p.score_out.weights, &p.score_out.bias, &g)[0].tanh()
}

/// Pre-activations of both hidden layers, used to stay away from LeakyReLU kinks.
pub fn hidden_preactivations(s: &Scorer, x: &[f64]) -> Vec<f64> {
    let p = &s.params;
    let mut z = dense(&p.rep_hidden.weights, &p.rep_hidden.bias, x);
    let r = represent(s, x);
    z.extend(dense(&p.score_hidden.weights, &p.score_hidden.bias, &r));
    z
}

pub fn smooth_l1(a: f64, b: f64, beta: f64) -> f64 {
    let d = (a - b).abs();
    if d < beta {
        0.5 * d * d / beta
    } else {
        d - 0.5 * beta
    }
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn row(m: &Array2<f64>, i: usize) -> Vec<f64> {
    m.row(i).to_vec()
}

/// Source pool in interpolation order with labels.
pub fn pool(batch: &MiniBatch) -> Vec<(Vec<f64>, f64)> {
    let mut out = Vec::new();
    for i in 0..batch.anomalies.nrows() {
        out.push((row(&batch.anomalies, i), 1.0));
    }
    for i in 0..batch.unlabeled.nrows() {
        out.push((row(&batch.unlabeled, i), -1.0));
    }
    out
}

pub fn hinge_arguments(s: &Scorer, batch: &MiniBatch, margin: f64) -> Vec<f64> {
    (0..batch.anomalies.nrows())
        .map(|i| {
            let q = represent(s, &row(&batch.anchors, i));
            let pos = represent(s, &row(&batch.anomalies, i));
            let neg = represent(s, &row(&batch.unlabeled, i));
            euclid(&neg, &q) - euclid(&pos, &q) + margin
        })
        .collect()
}

pub fn regularizer(s: &Scorer, batch: &MiniBatch, margin: f64) -> f64 {
    let args = hinge_arguments(s, batch, margin);
    args.iter().map(|a| a.max(0.0)).sum::<f64>() / args.len() as f64
}

/// Scoring loss straight from its definition.
pub fn scoring(
    s: &Scorer,
    batch: &MiniBatch,
    augmented: &[AugmentedSample],
    mode: AblationMode,
    beta: f64,
) -> f64 {
    let pool = pool(batch);
    if mode == AblationMode::PlainRegression {
        return pool
            .iter()
            .map(|(x, y)| smooth_l1(score(s, x), *y, beta))
            .sum::<f64>()
            / pool.len() as f64;
    }
    let mut total = 0.0;
    for a in augmented {
        let sx = score(s, a.x.as_slice().unwrap());
        let y: f64 = a
            .sources
            .iter()
            .zip(&a.lambdas)
            .map(|(&i, &l)| l * pool[i].1)
            .sum();
        let target = match mode {
            AblationMode::DiscreteTargets => {
                if y > 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            _ => y,
        };
        total += smooth_l1(sx, target, beta);
        if mode != AblationMode::NoConsistency {
            let mixed: f64 = a
                .sources
                .iter()
                .zip(&a.lambdas)
                .map(|(&i, &l)| l * score(s, &pool[i].0))
                .sum();
            total += smooth_l1(sx, mixed, beta);
        }
    }
    total / augmented.len() as f64
}

/// `w·L + (1 - w)·L'`, or `L` alone when the regularizer is ablated.
pub fn objective(
    s: &Scorer,
    batch: &MiniBatch,
    augmented: &[AugmentedSample],
    mode: AblationMode,
    w: f64,
    margin: f64,
    beta: f64,
) -> f64 {
    let l = scoring(s, batch, augmented, mode, beta);
    if mode == AblationMode::NoRegularizer {
        l
    } else {
        w * l + (1.0 - w) * regularizer(s, batch, margin)
    }
}

/// Pairwise AUC-ROC: wins plus half ties over all positive/negative pairs.
pub fn pairwise_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if labels[i] != 1 {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] != 0 {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Average precision by walking thresholds: at every distinct score, recall
/// gained times precision at that threshold.
pub fn walked_average_precision(scores: &[f64], labels: &[u8]) -> f64 {
    let n_pos = labels.iter().filter(|&&l| l == 1).count() as f64;
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let mut ap = 0.0;
    let mut prev_tp = 0usize;
    for t in thresholds {
        let tp = scores
            .iter()
            .zip(labels)
            .filter(|(s, l)| **s >= t && **l == 1)
            .count();
        let predicted = scores.iter().filter(|s| **s >= t).count();
        if tp > prev_tp {
            ap += ((tp - prev_tp) as f64 / n_pos) * (tp as f64 / predicted as f64);
        }
        prev_tp = tp;
    }
    ap
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}
