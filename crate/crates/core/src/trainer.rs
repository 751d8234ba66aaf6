//! Training loop.
//!
//! Each batch draws `b` labeled anomalies and `2b` unlabeled rows (split into
//! the unlabeled block and the anchors), interpolates an augmented batch,
//! evaluates the blended objective and takes one Adam step. Epoch averages
//! of both losses feed the next epoch's dynamic weight.

use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::eval;
use crate::losses::{self, AblationMode, LossConfig, LossState, MiniBatch, WeightPolicy};
use crate::nn::{Adam, AdamConfig, DEFAULT_SLOPE};
use crate::rng::{self, Stream};
use crate::scorer::{Architecture, Scorer};
use crate::supervision;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub batches_per_epoch: usize,
    pub learning_rate: f64,
    pub rep_dim: usize,
    /// `[h1, h2]` overriding the default hidden-width rule.
    pub hidden_widths: Option<[usize; 2]>,
    /// Samples mixed per augmented sample.
    pub k: usize,
    /// Beta / Dirichlet concentration of the mixing weights.
    pub alpha: f64,
    pub margin: f64,
    pub temperature: f64,
    pub weight_decay: f64,
    pub slope: f64,
    pub smooth_beta: f64,
    pub ablation: AblationMode,
    /// Augmented samples per batch; `None` means `2 · batch_size`.
    pub augmented_size: Option<usize>,
    /// Keep the epoch with the best validation AUC-PR when validation labels exist.
    pub model_selection: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 32,
            epochs: 50,
            batches_per_epoch: 20,
            learning_rate: 0.005,
            rep_dim: 128,
            hidden_widths: None,
            k: 2,
            alpha: 0.5,
            margin: losses::DEFAULT_MARGIN,
            temperature: losses::DEFAULT_TEMPERATURE,
            weight_decay: 1e-5,
            slope: DEFAULT_SLOPE,
            smooth_beta: losses::DEFAULT_SMOOTH_BETA,
            ablation: AblationMode::Full,
            augmented_size: None,
            model_selection: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.batch_size == 0 {
            return bad("batch size must be positive".into());
        }
        if self.epochs > 0 && self.batches_per_epoch == 0 {
            return bad("batches per epoch must be positive".into());
        }
        if self.k < 2 {
            return bad(format!("k must be at least 2, got {}", self.k));
        }
        if self.k > 2 * self.batch_size {
            return bad(format!(
                "k = {} exceeds the 2b = {} source rows",
                self.k,
                2 * self.batch_size
            ));
        }
        if !(self.alpha > 0.0) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.margin > 0.0) {
            return bad(format!("margin must be positive, got {}", self.margin));
        }
        if !(self.temperature > 0.0) {
            return bad(format!(
                "temperature must be positive, got {}",
                self.temperature
            ));
        }
        if !(self.smooth_beta > 0.0) {
            return bad(format!(
                "smooth-l1 beta must be positive, got {}",
                self.smooth_beta
            ));
        }
        if self.augmented_size == Some(0) {
            return bad("augmented batch size must be positive".into());
        }
        Ok(())
    }

    pub fn loss_config(&self) -> LossConfig {
        LossConfig {
            mode: self.ablation,
            margin: self.margin,
            smooth_beta: self.smooth_beta,
        }
    }

    pub fn adam_config(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            weight_decay: self.weight_decay,
            ..AdamConfig::default()
        }
    }

    pub fn architecture(&self, input_dim: usize) -> Result<Architecture> {
        match self.hidden_widths {
            Some([h1, h2]) => Architecture::with_hidden(input_dim, self.rep_dim, h1, h2),
            None => Architecture::new(input_dim, self.rep_dim),
        }
    }

    pub fn augmented_count(&self) -> usize {
        self.augmented_size.unwrap_or(2 * self.batch_size)
    }
}

/// Per-epoch progress record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_scoring: f64,
    /// `None` when the regularizer is ablated away.
    pub mean_regularizer: Option<f64>,
    pub mean_weight: f64,
    /// Blend weight of every batch in the epoch.
    pub weights: Vec<f64>,
    pub valid_auc_pr: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// Wall-clock seconds per epoch. Kept apart from the records, which are
    /// bit-reproducible. Not serialized.
    #[serde(skip)]
    pub epoch_seconds: Vec<f64>,
    /// 1-based epoch whose parameters were returned, if model selection ran.
    pub selected_epoch: Option<usize>,
}

/// Draws one mini-batch.
///
/// Anomalies are drawn without replacement when the pool has at least `b`
/// rows and with replacement otherwise. `2b` distinct unlabeled rows are
/// drawn; the first `b` form the unlabeled block and the rest the anchors.
pub fn sample_batches<R: Rng + ?Sized>(
    anomalies: ArrayView2<'_, f64>,
    unlabeled: ArrayView2<'_, f64>,
    b: usize,
    rng: &mut R,
) -> Result<MiniBatch> {
    let (idx_a, idx_u) = sample_batch_indices(anomalies.nrows(), unlabeled.nrows(), b, rng)?;
    let u = unlabeled.select(Axis(0), &idx_u);
    Ok(MiniBatch {
        anomalies: anomalies.select(Axis(0), &idx_a),
        unlabeled: u.slice(ndarray::s![..b, ..]).to_owned(),
        anchors: u.slice(ndarray::s![b.., ..]).to_owned(),
    })
}

/// Row indices behind [`sample_batches`]: `b` anomaly rows and `2b` unlabeled rows.
pub fn sample_batch_indices<R: Rng + ?Sized>(
    n_anomalies: usize,
    n_unlabeled: usize,
    b: usize,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if n_anomalies == 0 {
        return Err(Error::UnusableDataset(
            "no labeled anomalies to train on".into(),
        ));
    }
    if n_unlabeled < 2 * b {
        return Err(Error::UnusableDataset(format!(
            "unlabeled pool has {n_unlabeled} rows, need at least 2b = {}",
            2 * b
        )));
    }
    let idx_a = if n_anomalies >= b {
        index::sample(rng, n_anomalies, b).into_vec()
    } else {
        (0..b).map(|_| rng.random_range(0..n_anomalies)).collect()
    };
    let idx_u = index::sample(rng, n_unlabeled, 2 * b).into_vec();
    Ok((idx_a, idx_u))
}

pub fn train(dataset: &Dataset, config: &TrainConfig) -> Result<(Scorer, TrainHistory)> {
    train_with_progress(dataset, config, |_| {})
}

/// Like [`train`], calling `on_epoch` after every completed epoch.
pub fn train_with_progress(
    dataset: &Dataset,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<(Scorer, TrainHistory)> {
    config.validate()?;
    let (anomalies, unlabeled) = dataset.training_pools();
    if anomalies.nrows() == 0 {
        return Err(Error::UnusableDataset(
            "no labeled anomalies to train on".into(),
        ));
    }
    if unlabeled.nrows() < 2 * config.batch_size {
        return Err(Error::UnusableDataset(format!(
            "unlabeled pool has {} rows, need at least 2b = {}",
            unlabeled.nrows(),
            2 * config.batch_size
        )));
    }

    let arch = config.architecture(dataset.n_features())?;
    let mut scorer = Scorer::init(
        arch,
        config.slope,
        &mut rng::stream(config.seed, Stream::Init),
    )?;
    let mut history = TrainHistory::default();
    if config.epochs == 0 {
        return Ok((scorer, history));
    }

    let mut batch_rng = rng::stream(config.seed, Stream::Batching);
    let mut aug_rng = rng::stream(config.seed, Stream::Augmentation);
    let mut adam = Adam::new(config.adam_config())?;
    let mut state = LossState::new(config.temperature)?;
    let loss_config = config.loss_config();
    let mode = config.ablation;

    let valid = dataset.valid_view();
    let select = config.model_selection && valid.labels.contains(&1);
    let mut best: Option<(f64, usize, Scorer)> = None;

    for epoch in 1..=config.epochs {
        let started = Instant::now();
        let mut scoring_losses = Vec::with_capacity(config.batches_per_epoch);
        let mut regularizer_losses = Vec::with_capacity(config.batches_per_epoch);
        let mut weights = Vec::with_capacity(config.batches_per_epoch);

        for batch_no in 1..=config.batches_per_epoch {
            let diverged = |detail: String| Error::TrainingDiverged {
                epoch,
                batch: batch_no,
                detail,
            };
            let batch = sample_batches(
                anomalies.view(),
                unlabeled.view(),
                config.batch_size,
                &mut batch_rng,
            )?;
            let augmented = if mode.uses_interpolation() {
                supervision::augment_batch(
                    &batch.sources(),
                    config.k,
                    config.alpha,
                    config.augmented_count(),
                    &mut aug_rng,
                )?
            } else {
                Vec::new()
            };
            let (value, tape) = losses::objective(
                &scorer,
                &batch,
                &augmented,
                &loss_config,
                WeightPolicy::Dynamic(&state),
            )?;
            if !value.total.is_finite() {
                return Err(diverged(format!("non-finite loss {}", value.total)));
            }
            adam.step(&mut scorer.params, &tape)
                .map_err(|e| diverged(e.to_string()))?;
            if !scorer.params.is_finite() {
                return Err(diverged("non-finite parameter after update".into()));
            }
            scoring_losses.push(value.scoring);
            if let Some(r) = value.regularizer {
                regularizer_losses.push(r);
            }
            weights.push(value.weight);
        }

        if mode.uses_regularizer() {
            state.update_epoch_averages(&scoring_losses, &regularizer_losses)?;
        } else {
            state.update_scoring_average(&scoring_losses)?;
        }

        let valid_auc_pr = if select {
            let scores = scorer.score_batch(valid.features.view())?;
            Some(eval::auc_pr(
                scores.as_slice().expect("contiguous"),
                &valid.labels,
            )?)
        } else {
            None
        };
        if let Some(ap) = valid_auc_pr {
            if best.as_ref().is_none_or(|(b, _, _)| ap > *b) {
                best = Some((ap, epoch, scorer.clone()));
            }
        }

        let record = EpochRecord {
            epoch,
            mean_scoring: state.mean_scoring,
            mean_regularizer: mode.uses_regularizer().then_some(state.mean_regularizer),
            mean_weight: weights.iter().sum::<f64>() / weights.len() as f64,
            weights,
            valid_auc_pr,
        };
        on_epoch(&record);
        history.epochs.push(record);
        history.epoch_seconds.push(started.elapsed().as_secs_f64());
    }

    if let Some((_, epoch, snapshot)) = best {
        history.selected_epoch = Some(epoch);
        scorer = snapshot;
    }
    Ok((scorer, history))
}

/// Anomaly scores for `features`; never looks at labels.
pub fn predict(scorer: &Scorer, features: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
    scorer.score_batch(features)
}

/// Convenience for callers holding an owned matrix.
pub fn predict_owned(scorer: &Scorer, features: &Array2<f64>) -> Result<Vec<f64>> {
    Ok(predict(scorer, features.view())?.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Role;
    use crate::rng::stream;

    fn tiny_dataset() -> Dataset {
        // 4 anomalies near (1, 1), 80 unlabeled rows near (0, 0).
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut roles = Vec::new();
        for i in 0..84 {
            let t = i as f64 / 84.0;
            if i < 4 {
                rows.extend([0.9 + 0.02 * t, 0.95 - 0.01 * t]);
                labels.push(1);
                roles.push(Role::LabeledAnomaly);
            } else {
                rows.extend([0.3 * (t * 7.0).sin().abs(), 0.3 * (t * 3.0).cos().abs()]);
                labels.push(0);
                roles.push(Role::Unlabeled);
            }
        }
        let mut ds =
            Dataset::from_features(Array2::from_shape_vec((84, 2), rows).unwrap(), labels).unwrap();
        ds.roles = roles;
        ds
    }

    #[test]
    fn batch_sampling_shapes() {
        let a = Array2::from_shape_fn((30, 3), |(i, _)| i as f64);
        let u = Array2::from_shape_fn((64, 3), |(i, _)| 100.0 + i as f64);
        let mut rng = stream(1, Stream::Batching);
        let batch = sample_batches(a.view(), u.view(), 32, &mut rng).unwrap();
        assert_eq!(batch.anomalies.nrows(), 32);
        assert_eq!((batch.unlabeled.nrows(), batch.anchors.nrows()), (32, 32));
        // The 64 unlabeled draws are a partition of the pool.
        let mut seen: Vec<f64> = batch
            .unlabeled
            .column(0)
            .iter()
            .chain(batch.anchors.column(0))
            .copied()
            .collect();
        seen.sort_by(f64::total_cmp);
        seen.dedup();
        assert_eq!(seen.len(), 64);

        let again =
            sample_batches(a.view(), u.view(), 32, &mut stream(1, Stream::Batching)).unwrap();
        assert_eq!(batch, again);
    }

    #[test]
    fn batch_sampling_errors() {
        let mut rng = stream(1, Stream::Batching);
        assert!(matches!(
            sample_batch_indices(0, 100, 8, &mut rng),
            Err(Error::UnusableDataset(_))
        ));
        assert!(sample_batch_indices(3, 15, 8, &mut rng).is_err());
    }

    #[test]
    fn zero_epochs_returns_initial_parameters() {
        let ds = tiny_dataset();
        let config = TrainConfig {
            epochs: 0,
            rep_dim: 8,
            batch_size: 8,
            ..TrainConfig::default()
        };
        let (scorer, history) = train(&ds, &config).unwrap();
        let arch = Architecture::new(2, 8).unwrap();
        let fresh = Scorer::init(arch, DEFAULT_SLOPE, &mut stream(0, Stream::Init)).unwrap();
        assert_eq!(scorer, fresh);
        assert!(history.epochs.is_empty());
    }

    #[test]
    fn training_separates_toy_anomalies() {
        let ds = tiny_dataset();
        let config = TrainConfig {
            epochs: 10,
            batches_per_epoch: 10,
            rep_dim: 16,
            batch_size: 16,
            ..TrainConfig::default()
        };
        let (scorer, history) = train(&ds, &config).unwrap();
        assert_eq!(history.epochs.len(), 10);
        let (a, u) = ds.training_pools();
        let sa = predict(&scorer, a.view()).unwrap();
        let su = predict(&scorer, u.view()).unwrap();
        assert!(sa.mean().unwrap() > su.mean().unwrap());
        assert_eq!(predict(&scorer, u.view()).unwrap(), su);
    }

    #[test]
    fn no_regularizer_mode_runs() {
        let ds = tiny_dataset();
        let config = TrainConfig {
            epochs: 2,
            batches_per_epoch: 3,
            rep_dim: 8,
            batch_size: 8,
            ablation: AblationMode::NoRegularizer,
            ..TrainConfig::default()
        };
        let (_, history) = train(&ds, &config).unwrap();
        assert!(history.epochs.iter().all(|e| e.mean_regularizer.is_none()));
        assert!(history
            .epochs
            .iter()
            .flat_map(|e| &e.weights)
            .all(|&w| w == 1.0));
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        for broken in [
            TrainConfig {
                k: 1,
                ..TrainConfig::default()
            },
            TrainConfig {
                alpha: 0.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                batch_size: 0,
                ..TrainConfig::default()
            },
            TrainConfig {
                temperature: -1.0,
                ..TrainConfig::default()
            },
        ] {
            assert!(broken.validate().is_err());
        }
    }

    #[test]
    fn empty_predict() {
        let scorer = crate::scorer::build_scorer(3, 8, 1).unwrap();
        assert!(predict(&scorer, Array2::zeros((0, 3)).view())
            .unwrap()
            .is_empty());
    }
}
