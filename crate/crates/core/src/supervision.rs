//! Mass interpolation.
//!
//! Augmented samples are convex combinations of `k` rows of a mini-batch in
//! which labeled anomalies carry `y = +1` and unlabeled rows `y = -1`. The
//! same weights mix the labels, so the targets are continuous in `[-1, 1]`.

use ndarray::Array1;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};

pub const ANOMALY: f64 = 1.0;
pub const UNLABELED: f64 = -1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub x: Array1<f64>,
    pub y: f64,
}

impl LabeledSample {
    pub fn anomaly(x: Array1<f64>) -> Self {
        Self { x, y: ANOMALY }
    }

    pub fn unlabeled(x: Array1<f64>) -> Self {
        Self { x, y: UNLABELED }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSample {
    pub x: Array1<f64>,
    pub y: f64,
    /// Indices into the source batch.
    pub sources: Vec<usize>,
    pub lambdas: Vec<f64>,
}

/// Draws mixing weights on the `k`-simplex.
///
/// Each weight is a normalised `Gamma(alpha, 1)` draw, i.e. a symmetric
/// Dirichlet; for `k = 2` the first weight is exactly `Beta(alpha, alpha)`
/// and the second is `1 - λ₁`.
pub fn sample_weights<R: Rng + ?Sized>(k: usize, alpha: f64, rng: &mut R) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "k must be at least 2, got {k}"
        )));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let gamma = Gamma::new(alpha, 1.0).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    loop {
        let draws: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        // Every draw underflowing to zero is astronomically rare for sane alpha.
        if !(total > 0.0 && total.is_finite()) {
            continue;
        }
        let mut weights: Vec<f64> = draws.iter().map(|g| g / total).collect();
        if k == 2 {
            weights[1] = 1.0 - weights[0];
        }
        return Ok(weights);
    }
}

/// Mixes `batch[sources[i]]` with weights `lambdas[i]`.
pub fn mix(batch: &[LabeledSample], sources: &[usize], lambdas: &[f64]) -> Result<AugmentedSample> {
    if sources.len() != lambdas.len() || sources.is_empty() {
        return Err(Error::Contract(format!(
            "{} sources but {} weights",
            sources.len(),
            lambdas.len()
        )));
    }
    let first = batch
        .get(sources[0])
        .ok_or_else(|| Error::Contract(format!("source index {} out of range", sources[0])))?;
    let mut x = Array1::zeros(first.x.len());
    let mut y = 0.0;
    for (&s, &l) in sources.iter().zip(lambdas) {
        let sample = batch
            .get(s)
            .ok_or_else(|| Error::Contract(format!("source index {s} out of range")))?;
        crate::error::check_dim("mixed sample width", x.len(), sample.x.len())?;
        x.scaled_add(l, &sample.x);
        y += l * sample.y;
    }
    let shared = sources.iter().all(|&s| batch[s].y == first.y);
    let y = if shared { first.y } else { y.clamp(-1.0, 1.0) };
    Ok(AugmentedSample {
        x,
        y,
        sources: sources.to_vec(),
        lambdas: lambdas.to_vec(),
    })
}

/// Builds `m` augmented samples, each from `k` distinct rows drawn uniformly
/// from `batch`.
pub fn augment_batch<R: Rng + ?Sized>(
    batch: &[LabeledSample],
    k: usize,
    alpha: f64,
    m: usize,
    rng: &mut R,
) -> Result<Vec<AugmentedSample>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "k must be at least 2, got {k}"
        )));
    }
    if batch.len() < k {
        return Err(Error::InsufficientBatch {
            needed: k,
            available: batch.len(),
        });
    }
    (0..m)
        .map(|_| {
            let sources = index::sample(rng, batch.len(), k).into_vec();
            let lambdas = sample_weights(k, alpha, rng)?;
            mix(batch, &sources, &lambdas)
        })
        .collect()
}
