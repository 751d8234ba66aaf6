//! Training objective.
//!
//! The scoring loss regresses scores of interpolated samples onto their
//! continuous targets and, through a consistency term, onto the same convex
//! combination of the source scores. The feature regularizer is a triplet
//! hinge on Euclidean distances in representation space that pushes labeled
//! anomalies further from unlabeled anchors than unlabeled rows are. The two
//! are blended with a per-batch softmax weight driven by last-epoch averages.

use std::fmt;
use std::str::FromStr;

use ndarray::{concatenate, Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::scorer::{GradientTape, Scorer};
use crate::supervision::{AugmentedSample, LabeledSample};

pub const DEFAULT_SMOOTH_BETA: f64 = 1.0;
pub const DEFAULT_MARGIN: f64 = 1.0;
pub const DEFAULT_TEMPERATURE: f64 = 2.0;

/// Floor for stored epoch averages; an epoch whose loss is exactly zero
/// would otherwise divide by zero in the weight computation.
const MIN_AVERAGE: f64 = 1e-12;

/// Huber-style smooth ℓ1 on `d = pred - target`.
pub fn smooth_l1(pred: f64, target: f64, beta: f64) -> f64 {
    let d = pred - target;
    if d.abs() < beta {
        0.5 * d * d / beta
    } else {
        d.abs() - 0.5 * beta
    }
}

/// ∂ smooth_l1 / ∂ pred.
pub fn smooth_l1_grad(pred: f64, target: f64, beta: f64) -> f64 {
    let d = pred - target;
    if d.abs() < beta {
        d / beta
    } else {
        d.signum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationMode {
    /// Interpolated targets, consistency term, regularizer and dynamic weight.
    #[default]
    Full,
    /// Interpolated targets replaced by their sign (0 maps to -1).
    DiscreteTargets,
    /// Smooth ℓ1 against ±1 labels of the raw batch, no interpolation.
    PlainRegression,
    /// Scoring loss without its consistency term.
    NoConsistency,
    /// Weight pinned to 1; the regularizer is never evaluated.
    NoRegularizer,
}

impl AblationMode {
    pub const ALL: [AblationMode; 5] = [
        AblationMode::Full,
        AblationMode::DiscreteTargets,
        AblationMode::PlainRegression,
        AblationMode::NoConsistency,
        AblationMode::NoRegularizer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AblationMode::Full => "full",
            AblationMode::DiscreteTargets => "discrete_targets",
            AblationMode::PlainRegression => "plain_regression",
            AblationMode::NoConsistency => "no_consistency",
            AblationMode::NoRegularizer => "no_regularizer",
        }
    }

    pub fn uses_interpolation(self) -> bool {
        self != AblationMode::PlainRegression
    }

    pub fn uses_regularizer(self) -> bool {
        self != AblationMode::NoRegularizer
    }

    fn uses_consistency(self) -> bool {
        matches!(
            self,
            AblationMode::Full | AblationMode::DiscreteTargets | AblationMode::NoRegularizer
        )
    }
}

impl fmt::Display for AblationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AblationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let normalized = s.trim().to_ascii_lowercase().replace('-', "_");
        AblationMode::ALL
            .into_iter()
            .find(|m| m.as_str() == normalized)
            .ok_or_else(|| Error::UnknownMode(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub mode: AblationMode,
    pub margin: f64,
    pub smooth_beta: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            mode: AblationMode::Full,
            margin: DEFAULT_MARGIN,
            smooth_beta: DEFAULT_SMOOTH_BETA,
        }
    }
}

/// Running state of the dynamic weighting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossState {
    /// Average scoring loss over the last completed epoch.
    pub mean_scoring: f64,
    /// Average regularizer over the last completed epoch.
    pub mean_regularizer: f64,
    pub temperature: f64,
}

impl LossState {
    /// Both averages start at 1.
    pub fn new(temperature: f64) -> Result<Self> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        Ok(Self {
            mean_scoring: 1.0,
            mean_regularizer: 1.0,
            temperature,
        })
    }

    pub fn update_epoch_averages(&mut self, scoring: &[f64], regularizer: &[f64]) -> Result<()> {
        if regularizer.is_empty() {
            return Err(Error::Contract(
                "no regularizer losses recorded this epoch".into(),
            ));
        }
        self.update_scoring_average(scoring)?;
        self.mean_regularizer = mean(regularizer).max(MIN_AVERAGE);
        Ok(())
    }

    pub fn update_scoring_average(&mut self, scoring: &[f64]) -> Result<()> {
        if scoring.is_empty() {
            return Err(Error::Contract(
                "no scoring losses recorded this epoch".into(),
            ));
        }
        self.mean_scoring = mean(scoring).max(MIN_AVERAGE);
        Ok(())
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Softmax weight of the scoring loss against the regularizer, each
/// normalised by its last-epoch average and the temperature.
pub fn dynamic_weight(scoring: f64, regularizer: f64, state: &LossState) -> f64 {
    let a = scoring / (state.temperature * state.mean_scoring);
    let b = regularizer / (state.temperature * state.mean_regularizer);
    let top = a.max(b);
    let ea = (a - top).exp();
    let eb = (b - top).exp();
    ea / (ea + eb)
}

/// One training mini-batch: `b` labeled anomalies, `b` unlabeled rows and `b`
/// unlabeled anchors. Row `i` of each block forms one triplet.
#[derive(Debug, Clone, PartialEq)]
pub struct MiniBatch {
    pub anomalies: Array2<f64>,
    pub unlabeled: Array2<f64>,
    pub anchors: Array2<f64>,
}

impl MiniBatch {
    pub fn validate(&self) -> Result<()> {
        let b = self.anomalies.nrows();
        if b == 0 {
            return Err(Error::Contract("empty mini-batch".into()));
        }
        check_dim("unlabeled rows", b, self.unlabeled.nrows())?;
        check_dim("anchor rows", b, self.anchors.nrows())?;
        let d = self.anomalies.ncols();
        check_dim("unlabeled width", d, self.unlabeled.ncols())?;
        check_dim("anchor width", d, self.anchors.ncols())?;
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.anomalies.nrows()
    }

    /// The interpolation pool: anomalies (`y = +1`) first, then unlabeled rows
    /// (`y = -1`). Augmented sample source indices refer to this order.
    pub fn sources(&self) -> Vec<LabeledSample> {
        self.anomalies
            .rows()
            .into_iter()
            .map(|r| LabeledSample::anomaly(r.to_owned()))
            .chain(
                self.unlabeled
                    .rows()
                    .into_iter()
                    .map(|r| LabeledSample::unlabeled(r.to_owned())),
            )
            .collect()
    }

    fn source_labels(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::repeat_n(1.0, self.anomalies.nrows())
            .chain(std::iter::repeat_n(-1.0, self.unlabeled.nrows()))
    }
}

fn stack_rows(x: &[Array1<f64>], width: usize) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((x.len(), width));
    for (i, row) in x.iter().enumerate() {
        check_dim("stacked row width", width, row.len())?;
        out.row_mut(i).assign(row);
    }
    Ok(out)
}

fn mixed_score(sample: &AugmentedSample, source_scores: ArrayView1<'_, f64>) -> Result<f64> {
    let mut acc = 0.0;
    for (&s, &l) in sample.sources.iter().zip(&sample.lambdas) {
        let v = source_scores
            .get(s)
            .ok_or_else(|| Error::Contract(format!("dangling source index {s}")))?;
        acc += l * v;
    }
    Ok(acc)
}

fn target_for(sample: &AugmentedSample, mode: AblationMode) -> f64 {
    if mode == AblationMode::DiscreteTargets {
        if sample.y > 0.0 {
            1.0
        } else {
            -1.0
        }
    } else {
        sample.y
    }
}

/// Scoring loss from precomputed scores.
///
/// `augmented_scores[j]` is the score of `augmented[j].x` and
/// `source_scores` the scores of the pool its source indices point into.
/// Only the interpolating modes are meaningful here.
pub fn scoring_loss_from_scores(
    augmented_scores: ArrayView1<'_, f64>,
    augmented: &[AugmentedSample],
    source_scores: ArrayView1<'_, f64>,
    config: &LossConfig,
) -> Result<f64> {
    Ok(scoring_terms(augmented_scores, augmented, source_scores, config)?.0)
}

/// Returns (loss, ∂/∂augmented score, ∂/∂source score).
fn scoring_terms(
    augmented_scores: ArrayView1<'_, f64>,
    augmented: &[AugmentedSample],
    source_scores: ArrayView1<'_, f64>,
    config: &LossConfig,
) -> Result<(f64, Array1<f64>, Array1<f64>)> {
    check_dim("augmented scores", augmented.len(), augmented_scores.len())?;
    if augmented.is_empty() {
        return Err(Error::Contract("empty augmented batch".into()));
    }
    let m = augmented.len() as f64;
    let beta = config.smooth_beta;
    let consistency = config.mode.uses_consistency();
    let mut loss = 0.0;
    let mut d_aug = Array1::zeros(augmented.len());
    let mut d_src = Array1::zeros(source_scores.len());
    for (j, sample) in augmented.iter().enumerate() {
        let s = augmented_scores[j];
        let target = target_for(sample, config.mode);
        loss += smooth_l1(s, target, beta);
        d_aug[j] += smooth_l1_grad(s, target, beta) / m;
        let mixed = mixed_score(sample, source_scores)?;
        if consistency {
            loss += smooth_l1(s, mixed, beta);
            let g = smooth_l1_grad(s, mixed, beta) / m;
            d_aug[j] += g;
            for (&i, &l) in sample.sources.iter().zip(&sample.lambdas) {
                d_src[i] -= g * l;
            }
        }
    }
    Ok((loss / m, d_aug, d_src))
}

/// Scoring loss of the full objective evaluated with the scorer's current
/// parameters.
pub fn scoring_loss(
    scorer: &Scorer,
    augmented: &[AugmentedSample],
    sources: &[LabeledSample],
) -> Result<f64> {
    let d = scorer.input_dim();
    let src = stack_rows(&sources.iter().map(|s| s.x.clone()).collect::<Vec<_>>(), d)?;
    let aug = stack_rows(
        &augmented.iter().map(|s| s.x.clone()).collect::<Vec<_>>(),
        d,
    )?;
    let src_scores = scorer.score_batch(src.view())?;
    let aug_scores = scorer.score_batch(aug.view())?;
    scoring_loss_from_scores(
        aug_scores.view(),
        augmented,
        src_scores.view(),
        &LossConfig::default(),
    )
}

/// Hinge loss with its gradients w.r.t. the positive, negative and anchor
/// representations.
pub type HingeTerms = (f64, Array2<f64>, Array2<f64>, Array2<f64>);

/// Triplet hinge on representations.
pub fn triplet_hinge(
    positives: ArrayView2<'_, f64>,
    negatives: ArrayView2<'_, f64>,
    anchors: ArrayView2<'_, f64>,
    margin: f64,
) -> Result<HingeTerms> {
    let b = positives.nrows();
    if b == 0 {
        return Err(Error::Contract("empty triplet batch".into()));
    }
    check_dim("triplet negatives", b, negatives.nrows())?;
    check_dim("triplet anchors", b, anchors.nrows())?;
    let h = positives.ncols();
    let mut d_pos = Array2::zeros((b, h));
    let mut d_neg = Array2::zeros((b, h));
    let mut d_anchor = Array2::zeros((b, h));
    let mut loss = 0.0;
    let scale = 1.0 / b as f64;
    for i in 0..b {
        let to_pos = &positives.row(i) - &anchors.row(i);
        let to_neg = &negatives.row(i) - &anchors.row(i);
        let dist_pos = to_pos.dot(&to_pos).sqrt();
        let dist_neg = to_neg.dot(&to_neg).sqrt();
        let hinge = dist_neg - dist_pos + margin;
        if hinge <= 0.0 {
            continue;
        }
        loss += hinge;
        // The distance is not differentiable at zero; use the zero subgradient.
        if dist_neg > 0.0 {
            let u = to_neg / dist_neg * scale;
            d_neg.row_mut(i).scaled_add(1.0, &u);
            d_anchor.row_mut(i).scaled_add(-1.0, &u);
        }
        if dist_pos > 0.0 {
            let u = to_pos / dist_pos * scale;
            d_pos.row_mut(i).scaled_add(-1.0, &u);
            d_anchor.row_mut(i).scaled_add(1.0, &u);
        }
    }
    Ok((loss * scale, d_pos, d_neg, d_anchor))
}

/// Feature regularizer: mean hinge `max(d(φ(x⁻), φ(q)) - d(φ(x⁺), φ(q)) + e, 0)`.
pub fn feature_regularizer(scorer: &Scorer, batch: &MiniBatch, margin: f64) -> Result<f64> {
    batch.validate()?;
    let pos = scorer.represent_batch(batch.anomalies.view())?;
    let neg = scorer.represent_batch(batch.unlabeled.view())?;
    let anchor = scorer.represent_batch(batch.anchors.view())?;
    Ok(triplet_hinge(pos.view(), neg.view(), anchor.view(), margin)?.0)
}

/// How the scoring/regularizer blend weight is chosen for one batch.
#[derive(Debug, Clone, Copy)]
pub enum WeightPolicy<'a> {
    Dynamic(&'a LossState),
    Fixed(f64),
}

/// Loss values of one batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue {
    pub scoring: f64,
    /// `None` when the regularizer is ablated away.
    pub regularizer: Option<f64>,
    pub weight: f64,
    pub total: f64,
}

/// Evaluates `w·L + (1 - w)·L'` for one batch and its gradient with `w` held
/// constant.
///
/// `augmented` is ignored in [`AblationMode::PlainRegression`].
pub fn objective(
    scorer: &Scorer,
    batch: &MiniBatch,
    augmented: &[AugmentedSample],
    config: &LossConfig,
    policy: WeightPolicy<'_>,
) -> Result<(ObjectiveValue, GradientTape)> {
    let (value, pass_grads) = objective_inner(scorer, batch, augmented, config, policy, true)?;
    Ok((value, pass_grads.expect("gradient requested")))
}

/// Objective value only; used by finite-difference checks and diagnostics.
pub fn objective_value(
    scorer: &Scorer,
    batch: &MiniBatch,
    augmented: &[AugmentedSample],
    config: &LossConfig,
    policy: WeightPolicy<'_>,
) -> Result<ObjectiveValue> {
    Ok(objective_inner(scorer, batch, augmented, config, policy, false)?.0)
}

fn objective_inner(
    scorer: &Scorer,
    batch: &MiniBatch,
    augmented: &[AugmentedSample],
    config: &LossConfig,
    policy: WeightPolicy<'_>,
    want_gradient: bool,
) -> Result<(ObjectiveValue, Option<GradientTape>)> {
    batch.validate()?;
    let b = batch.size();
    let d = scorer.input_dim();
    check_dim("mini-batch width", d, batch.anomalies.ncols())?;
    let mode = config.mode;

    // Row layout: anomalies | unlabeled | anchors | augmented.
    let aug_rows = if mode.uses_interpolation() {
        stack_rows(
            &augmented.iter().map(|s| s.x.clone()).collect::<Vec<_>>(),
            d,
        )?
    } else {
        Array2::zeros((0, d))
    };
    let inputs = concatenate(
        Axis(0),
        &[
            batch.anomalies.view(),
            batch.unlabeled.view(),
            batch.anchors.view(),
            aug_rows.view(),
        ],
    )
    .map_err(|e| Error::Contract(e.to_string()))?;
    let pass = scorer.forward(inputs.view())?;
    let n = pass.len();
    let scores = pass.scores.view();
    let source_scores = scores.slice(ndarray::s![..2 * b]);

    let mut d_scores = Array1::<f64>::zeros(n);
    let scoring = if mode.uses_interpolation() {
        let aug_scores = scores.slice(ndarray::s![3 * b..]);
        let (loss, d_aug, d_src) = scoring_terms(aug_scores, augmented, source_scores, config)?;
        d_scores.slice_mut(ndarray::s![3 * b..]).assign(&d_aug);
        d_scores.slice_mut(ndarray::s![..2 * b]).assign(&d_src);
        loss
    } else {
        let m = (2 * b) as f64;
        let mut loss = 0.0;
        for (i, y) in batch.source_labels().enumerate() {
            loss += smooth_l1(source_scores[i], y, config.smooth_beta);
            d_scores[i] = smooth_l1_grad(source_scores[i], y, config.smooth_beta) / m;
        }
        loss / m
    };

    let mut d_reps: Option<Array2<f64>> = None;
    let regularizer = if mode.uses_regularizer() {
        let reps = &pass.representations;
        let (loss, d_pos, d_neg, d_anchor) = triplet_hinge(
            reps.slice(ndarray::s![..b, ..]),
            reps.slice(ndarray::s![b..2 * b, ..]),
            reps.slice(ndarray::s![2 * b..3 * b, ..]),
            config.margin,
        )?;
        let mut grads = Array2::zeros((n, scorer.rep_dim()));
        grads.slice_mut(ndarray::s![..b, ..]).assign(&d_pos);
        grads.slice_mut(ndarray::s![b..2 * b, ..]).assign(&d_neg);
        grads
            .slice_mut(ndarray::s![2 * b..3 * b, ..])
            .assign(&d_anchor);
        d_reps = Some(grads);
        Some(loss)
    } else {
        None
    };

    let weight = match (regularizer, policy) {
        (None, _) => 1.0,
        (Some(r), WeightPolicy::Dynamic(state)) => dynamic_weight(scoring, r, state),
        (Some(_), WeightPolicy::Fixed(w)) => w,
    };
    let total = weight * scoring + (1.0 - weight) * regularizer.unwrap_or(0.0);
    let value = ObjectiveValue {
        scoring,
        regularizer,
        weight,
        total,
    };
    if !want_gradient {
        return Ok((value, None));
    }
    d_scores *= weight;
    if let Some(g) = d_reps.as_mut() {
        *g *= 1.0 - weight;
    }
    let tape = scorer.backward(&pass, d_scores.view(), d_reps.as_ref().map(|g| g.view()))?;
    Ok((value, Some(tape)))
}
