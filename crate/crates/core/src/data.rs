//! Datasets, preprocessing and synthetic generators.
//!
//! A [`Dataset`] is a feature matrix with binary ground truth (1 = anomaly)
//! and a per-row [`Role`]. Every transformation takes a dataset by value and
//! returns a new one; nothing is mutated behind the caller's back.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Unassigned,
    LabeledAnomaly,
    Unlabeled,
    Valid,
    Test,
}

impl Role {
    pub fn is_training(self) -> bool {
        matches!(self, Role::LabeledAnomaly | Role::Unlabeled)
    }
}

/// Per-feature `(min, max)` taken from training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormState {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormState {
    pub fn identity(dim: usize) -> Self {
        Self {
            min: vec![0.0; dim],
            max: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// `(v - min) / (max - min)`, or 0 for a constant feature. Not clipped.
    pub fn apply_value(&self, j: usize, v: f64) -> f64 {
        let range = self.max[j] - self.min[j];
        if range > 0.0 {
            (v - self.min[j]) / range
        } else {
            0.0
        }
    }

    pub fn apply(&self, features: &Array2<f64>) -> Result<Array2<f64>> {
        check_dim("normalization width", self.dim(), features.ncols())?;
        let mut out = features.clone();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.apply_value(j, *v);
            }
        }
        Ok(out)
    }

    /// The single transform equal to applying `self` and then `next`.
    pub fn then(&self, next: &NormState) -> NormState {
        let mut min = self.min.clone();
        let mut max = self.max.clone();
        for j in 0..self.dim() {
            let range = self.max[j] - self.min[j];
            if range > 0.0 {
                min[j] = self.min[j] + next.min[j] * range;
                max[j] = self.min[j] + next.max[j] * range;
            }
        }
        NormState { min, max }
    }

    pub fn is_finite(&self) -> bool {
        self.min.iter().chain(&self.max).all(|v| v.is_finite())
    }
}

/// Rows of a dataset restricted to some roles.
#[derive(Debug, Clone, PartialEq)]
pub struct Subset {
    pub features: Array2<f64>,
    pub labels: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub features: Array2<f64>,
    /// Ground truth, 1 = anomaly.
    pub labels: Vec<u8>,
    pub roles: Vec<Role>,
    /// Rows synthesised by contamination control. Never used as injection sources.
    pub injected: Vec<bool>,
    pub norm: Option<NormState>,
}

impl Dataset {
    pub fn new(feature_names: Vec<String>, features: Array2<f64>, labels: Vec<u8>) -> Result<Self> {
        check_dim("feature names", features.ncols(), feature_names.len())?;
        check_dim("label count", features.nrows(), labels.len())?;
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::InvalidParameter("labels must be 0 or 1".into()));
        }
        let n = labels.len();
        Ok(Self {
            feature_names,
            features,
            labels,
            roles: vec![Role::Unassigned; n],
            injected: vec![false; n],
            norm: None,
        })
    }

    /// Dataset with generated feature names `f0, f1, ...`.
    pub fn from_features(features: Array2<f64>, labels: Vec<u8>) -> Result<Self> {
        let names = (0..features.ncols()).map(|j| format!("f{j}")).collect();
        Self::new(names, features, labels)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn indices_where(&self, pred: impl Fn(usize) -> bool) -> Vec<usize> {
        (0..self.n_rows()).filter(|&i| pred(i)).collect()
    }

    pub fn indices_with_role(&self, role: Role) -> Vec<usize> {
        self.indices_where(|i| self.roles[i] == role)
    }

    pub fn rows(&self, indices: &[usize]) -> Array2<f64> {
        self.features.select(Axis(0), indices)
    }

    pub fn subset(&self, roles: &[Role]) -> Subset {
        let idx = self.indices_where(|i| roles.contains(&self.roles[i]));
        Subset {
            features: self.rows(&idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn test_view(&self) -> Subset {
        self.subset(&[Role::Test])
    }

    pub fn valid_view(&self) -> Subset {
        self.subset(&[Role::Valid])
    }

    /// Labeled anomalies and unlabeled pool, in row order.
    pub fn training_pools(&self) -> (Array2<f64>, Array2<f64>) {
        (
            self.rows(&self.indices_with_role(Role::LabeledAnomaly)),
            self.rows(&self.indices_with_role(Role::Unlabeled)),
        )
    }

    /// Fraction of anomalies in the unlabeled pool, `None` if the pool is empty.
    pub fn unlabeled_anomaly_ratio(&self) -> Option<f64> {
        let pool = self.indices_with_role(Role::Unlabeled);
        if pool.is_empty() {
            return None;
        }
        let anomalies = pool.iter().filter(|&&i| self.labels[i] == 1).count();
        Some(anomalies as f64 / pool.len() as f64)
    }

    pub fn count(&self, role: Role, label: Option<u8>) -> usize {
        (0..self.n_rows())
            .filter(|&i| self.roles[i] == role && label.is_none_or(|l| self.labels[i] == l))
            .count()
    }

    fn retain_rows(self, keep: &[bool]) -> Self {
        let idx: Vec<usize> = (0..self.n_rows()).filter(|&i| keep[i]).collect();
        Self {
            features: self.features.select(Axis(0), &idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            roles: idx.iter().map(|&i| self.roles[i]).collect(),
            injected: idx.iter().map(|&i| self.injected[i]).collect(),
            feature_names: self.feature_names,
            norm: self.norm,
        }
    }

    /// Appends the rows of `other`, keeping their roles.
    pub fn concat(mut self, other: Dataset) -> Result<Self> {
        check_dim("concatenated width", self.n_features(), other.n_features())?;
        self.features =
            ndarray::concatenate(Axis(0), &[self.features.view(), other.features.view()])
                .map_err(|e| Error::Contract(e.to_string()))?;
        self.labels.extend(other.labels);
        self.roles.extend(other.roles);
        self.injected.extend(other.injected);
        Ok(self)
    }

    pub fn with_roles(mut self, role: Role) -> Self {
        self.roles = vec![role; self.n_rows()];
        self
    }
}

fn load_error(path: &str, row: usize, column: &str, message: impl Into<String>) -> Error {
    Error::Load {
        path: path.into(),
        row,
        column: column.to_string(),
        message: message.into(),
    }
}

/// Reads a headed CSV. With `label_column = None` every column is a feature
/// and all labels are 0.
pub fn read_csv<R: Read>(reader: R, label_column: Option<&str>, source: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| load_error(source, 0, "", e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let label_idx = match label_column {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| load_error(source, 0, name, "label column not found in header"))?,
        ),
        None => None,
    };
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&j| Some(j) != label_idx)
        .collect();
    let mut values = Vec::new();
    let mut raw_labels = Vec::new();
    let mut n = 0;
    for (r, record) in rdr.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| load_error(source, row, "", e.to_string()))?;
        if record.len() != headers.len() {
            return Err(load_error(
                source,
                row,
                "",
                format!("expected {} fields, found {}", headers.len(), record.len()),
            ));
        }
        for &j in &feature_cols {
            let cell = record[j].trim();
            let v: f64 = cell.parse().map_err(|_| {
                load_error(
                    source,
                    row,
                    &headers[j],
                    format!("non-numeric value `{cell}`"),
                )
            })?;
            if !v.is_finite() {
                return Err(load_error(
                    source,
                    row,
                    &headers[j],
                    format!("non-finite value `{cell}`"),
                ));
            }
            values.push(v);
        }
        if let Some(li) = label_idx {
            let cell = record[li].trim();
            let v: f64 = cell.parse().map_err(|_| {
                load_error(
                    source,
                    row,
                    &headers[li],
                    format!("non-numeric label `{cell}`"),
                )
            })?;
            raw_labels.push((row, v));
        }
        n += 1;
    }
    let features = Array2::from_shape_vec((n, feature_cols.len()), values)
        .map_err(|e| Error::Contract(e.to_string()))?;
    let labels = match label_idx {
        Some(li) => map_labels(&raw_labels, source, &headers[li])?,
        None => vec![0; n],
    };
    let names = feature_cols.iter().map(|&j| headers[j].clone()).collect();
    Dataset::new(names, features, labels)
}

/// Accepts `{0, 1}` or `{-1, +1}` labels and maps both to `{0, 1}`.
fn map_labels(raw: &[(usize, f64)], source: &str, column: &str) -> Result<Vec<u8>> {
    let has_neg = raw.iter().any(|&(_, v)| v == -1.0);
    let has_zero = raw.iter().any(|&(_, v)| v == 0.0);
    if let Some(&(row, v)) = raw
        .iter()
        .find(|&&(_, v)| v != 0.0 && v != 1.0 && v != -1.0)
    {
        return Err(load_error(
            source,
            row,
            column,
            format!("non-binary label `{v}`"),
        ));
    }
    if has_neg && has_zero {
        let row = raw
            .iter()
            .find(|&&(_, v)| v == -1.0)
            .map(|p| p.0)
            .unwrap_or(0);
        return Err(load_error(
            source,
            row,
            column,
            "labels mix {0,1} and {-1,+1} encodings",
        ));
    }
    Ok(raw.iter().map(|&(_, v)| u8::from(v == 1.0)).collect())
}

pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| load_error(&path.display().to_string(), 0, "", e.to_string()))?;
    read_csv(file, Some(label_column), &path.display().to_string())
}

/// Loads feature-only data, optionally dropping a label column if present.
pub fn load_features_csv(path: impl AsRef<Path>, drop_column: Option<&str>) -> Result<Dataset> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let mut file =
        std::fs::File::open(path).map_err(|e| load_error(&name, 0, "", e.to_string()))?;
    let mut text = String::new();
    file.read_to_string(&mut text)?;
    let present = drop_column.filter(|col| {
        text.lines()
            .next()
            .is_some_and(|h| h.split(',').any(|c| c.trim() == *col))
    });
    read_csv(text.as_bytes(), present, &name)
}

/// Writes features and the label column. Float formatting round-trips exactly.
pub fn write_csv<W: Write>(dataset: &Dataset, writer: W, label_column: &str) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = dataset.feature_names.clone();
    header.push(label_column.to_string());
    w.write_record(&header)?;
    for (row, label) in dataset.features.rows().into_iter().zip(&dataset.labels) {
        let mut rec: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        rec.push(label.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(dataset: &Dataset, path: impl AsRef<Path>, label_column: &str) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(dataset, std::io::BufWriter::new(file), label_column)
}

/// Min-max scaling fitted on training-role rows and applied to every row.
///
/// If the dataset already carries a normalization state, the stored state is
/// the composition, so it still maps raw inputs to the current features.
pub fn minmax_normalize(mut dataset: Dataset) -> Result<Dataset> {
    let train = dataset.indices_where(|i| dataset.roles[i].is_training());
    if train.is_empty() {
        return Err(Error::Contract(
            "normalization needs training-role rows".into(),
        ));
    }
    let d = dataset.n_features();
    let mut state = NormState {
        min: vec![f64::INFINITY; d],
        max: vec![f64::NEG_INFINITY; d],
    };
    for &i in &train {
        for (j, &v) in dataset.features.row(i).iter().enumerate() {
            state.min[j] = state.min[j].min(v);
            state.max[j] = state.max[j].max(v);
        }
    }
    dataset.features = state.apply(&dataset.features)?;
    dataset.norm = Some(match &dataset.norm {
        Some(prev) => prev.then(&state),
        None => state,
    });
    Ok(dataset)
}

/// Stratified train/valid/test split.
///
/// Anomalies and normals are shuffled and split independently; valid and
/// test each receive `floor(count · ratio)` rows and the remainder goes to
/// train. Train rows get [`Role::Unlabeled`].
pub fn split_dataset<R: Rng + ?Sized>(
    mut dataset: Dataset,
    ratios: (f64, f64, f64),
    rng: &mut R,
) -> Result<Dataset> {
    let (tr, va, te) = ratios;
    if [tr, va, te].iter().any(|r| !(0.0..=1.0).contains(r)) || ((tr + va + te) - 1.0).abs() > 1e-9
    {
        return Err(Error::InvalidParameter(format!(
            "split ratios must be non-negative and sum to 1, got {ratios:?}"
        )));
    }
    if dataset.n_rows() < 5 {
        return Err(Error::UnusableDataset(format!(
            "need at least 5 rows to split, have {}",
            dataset.n_rows()
        )));
    }
    for class in [1u8, 0u8] {
        let mut idx = dataset.indices_where(|i| dataset.labels[i] == class);
        idx.shuffle(rng);
        let n = idx.len() as f64;
        let n_valid = (n * va + 1e-9).floor() as usize;
        let n_test = (n * te + 1e-9).floor() as usize;
        for (pos, &i) in idx.iter().enumerate() {
            dataset.roles[i] = if pos < n_valid {
                Role::Valid
            } else if pos < n_valid + n_test {
                Role::Test
            } else {
                Role::Unlabeled
            };
        }
    }
    Ok(dataset)
}

/// Marks `min(n, available)` random training anomalies as labeled. The rest
/// of the training rows, leftover anomalies included, form the unlabeled pool.
pub fn select_labeled_anomalies<R: Rng + ?Sized>(
    mut dataset: Dataset,
    n: usize,
    rng: &mut R,
) -> Result<Dataset> {
    for role in dataset.roles.iter_mut() {
        if *role == Role::LabeledAnomaly {
            *role = Role::Unlabeled;
        }
    }
    let candidates = dataset.indices_where(|i| {
        dataset.roles[i] == Role::Unlabeled && dataset.labels[i] == 1 && !dataset.injected[i]
    });
    if candidates.is_empty() {
        return Err(Error::UnusableDataset(
            "no anomalies in the training split".into(),
        ));
    }
    let take = n.min(candidates.len());
    for pick in index::sample(rng, candidates.len(), take) {
        dataset.roles[candidates[pick]] = Role::LabeledAnomaly;
    }
    Ok(dataset)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContaminationSpec {
    pub target_ratio: f64,
    pub feature_fraction: f64,
}

impl ContaminationSpec {
    pub fn new(target_ratio: f64) -> Self {
        Self {
            target_ratio,
            feature_fraction: 0.05,
        }
    }
}

/// Copy of `source_a` with `ceil(fraction · D)` random positions taken from `source_b`.
pub fn inject_anomaly<R: Rng + ?Sized>(
    source_a: ArrayView1<'_, f64>,
    source_b: ArrayView1<'_, f64>,
    feature_fraction: f64,
    rng: &mut R,
) -> Result<Array1<f64>> {
    if !(feature_fraction > 0.0 && feature_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "feature fraction must lie in (0, 1], got {feature_fraction}"
        )));
    }
    check_dim("injection sources", source_a.len(), source_b.len())?;
    let d = source_a.len();
    let count = replaced_feature_count(d, feature_fraction);
    let mut out = source_a.to_owned();
    for j in index::sample(rng, d, count) {
        out[j] = source_b[j];
    }
    Ok(out)
}

/// `ceil(fraction · D)`, clamped to `[1, D]`.
pub fn replaced_feature_count(d: usize, fraction: f64) -> usize {
    ((fraction * d as f64 - 1e-9).ceil() as usize).clamp(1, d.max(1))
}

/// Removes or injects unlabeled anomalies until their share of the unlabeled
/// pool is within `1/|pool|` of the target.
///
/// Removal drops random unlabeled anomalies from the dataset. Injection
/// appends rows built by [`inject_anomaly`] from pairs of real (not injected)
/// training anomalies; they join the unlabeled pool with label 1.
pub fn adjust_contamination<R: Rng + ?Sized>(
    mut dataset: Dataset,
    spec: &ContaminationSpec,
    rng: &mut R,
) -> Result<Dataset> {
    let t = spec.target_ratio;
    if !(0.0..0.5).contains(&t) {
        return Err(Error::InvalidParameter(format!(
            "target contamination must lie in [0, 0.5), got {t}"
        )));
    }
    let pool = dataset.indices_with_role(Role::Unlabeled);
    if pool.is_empty() {
        return Err(Error::UnusableDataset("unlabeled pool is empty".into()));
    }
    let anomalies: Vec<usize> = pool
        .iter()
        .copied()
        .filter(|&i| dataset.labels[i] == 1)
        .collect();
    let (a, u) = (anomalies.len() as f64, pool.len() as f64);
    // Solve (a - r) / (u - r) = t for the number of rows to remove (negative: inject).
    let change = ((a - t * u) / (1.0 - t)).round() as i64;

    if change > 0 {
        let mut keep = vec![true; dataset.n_rows()];
        for pick in index::sample(rng, anomalies.len(), change as usize) {
            keep[anomalies[pick]] = false;
        }
        dataset = dataset.retain_rows(&keep);
    } else if change < 0 {
        let sources = dataset.indices_where(|i| {
            dataset.roles[i].is_training() && dataset.labels[i] == 1 && !dataset.injected[i]
        });
        if sources.is_empty() {
            return Err(Error::UnusableDataset(
                "contamination target unreachable: no real training anomalies to inject from"
                    .into(),
            ));
        }
        let needed = (-change) as usize;
        let mut rows = Array2::zeros((needed, dataset.n_features()));
        for mut row in rows.rows_mut() {
            let a = sources[rng.random_range(0..sources.len())];
            let b = if sources.len() > 1 {
                loop {
                    let b = sources[rng.random_range(0..sources.len())];
                    if b != a {
                        break b;
                    }
                }
            } else {
                a
            };
            let injected = inject_anomaly(
                dataset.features.row(a),
                dataset.features.row(b),
                spec.feature_fraction,
                rng,
            )?;
            row.assign(&injected);
        }
        let extra = Dataset {
            feature_names: dataset.feature_names.clone(),
            features: rows,
            labels: vec![1; needed],
            roles: vec![Role::Unlabeled; needed],
            injected: vec![true; needed],
            norm: None,
        };
        dataset = dataset.concat(extra)?;
    }
    debug_assert!({
        let ratio = dataset.unlabeled_anomaly_ratio().unwrap_or(t);
        let pool = dataset.count(Role::Unlabeled, None) as f64;
        (ratio - t).abs() <= 1.0 / pool + 1e-12
    });
    Ok(dataset)
}

fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Settings of the ten-feature toy generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyConfig {
    pub n: usize,
    pub anomaly_fraction: f64,
}

impl ToyConfig {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            anomaly_fraction: 0.05,
        }
    }
}

/// Centers of the three anomaly clusters in the informative subspace. The
/// normal class is a standard Gaussian at the origin.
pub const TOY_ANOMALY_CENTERS: [[f64; 3]; 3] = [[2.0, 2.0, 0.0], [2.0, 0.0, 2.0], [0.0, 2.0, 2.0]];
pub const TOY_ANOMALY_STD: f64 = 0.6;
pub const TOY_INFORMATIVE: usize = 3;
pub const TOY_REDUNDANT: usize = 5;
pub const TOY_NOISE: usize = 2;

#[derive(Debug, Clone)]
pub struct ToyDataset {
    pub dataset: Dataset,
    /// Anomaly cluster of each row, `None` for normal rows.
    pub cluster: Vec<Option<usize>>,
    /// `redundant[j] = Σ_k mixing[j][k] · informative[k]`.
    pub mixing: [[f64; TOY_INFORMATIVE]; TOY_REDUNDANT],
}

/// Ten features: three informative, five random linear combinations of the
/// informative ones and two standard-normal noise columns.
pub fn generate_toy(config: &ToyConfig, seed: u64) -> ToyDataset {
    let mut rng = rng::stream(seed, Stream::Synthesis);
    let n = config.n.max(1);
    let n_anom = ((n as f64) * config.anomaly_fraction).round() as usize;
    let mut mixing = [[0.0; TOY_INFORMATIVE]; TOY_REDUNDANT];
    for row in mixing.iter_mut() {
        for c in row.iter_mut() {
            *c = rng.random_range(-1.0..1.0);
        }
    }
    let d = TOY_INFORMATIVE + TOY_REDUNDANT + TOY_NOISE;
    let mut features = Array2::zeros((n, d));
    let mut labels = vec![0u8; n];
    let mut cluster = vec![None; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    for (rank, &i) in order.iter().enumerate() {
        let mut informative = [0.0; TOY_INFORMATIVE];
        if rank < n_anom {
            let c = rank % TOY_ANOMALY_CENTERS.len();
            for (k, v) in informative.iter_mut().enumerate() {
                *v = TOY_ANOMALY_CENTERS[c][k] + TOY_ANOMALY_STD * standard_normal(&mut rng);
            }
            labels[i] = 1;
            cluster[i] = Some(c);
        } else {
            for v in informative.iter_mut() {
                *v = standard_normal(&mut rng);
            }
        }
        let mut row = features.row_mut(i);
        for k in 0..TOY_INFORMATIVE {
            row[k] = informative[k];
        }
        for (j, coeffs) in mixing.iter().enumerate() {
            row[TOY_INFORMATIVE + j] = coeffs.iter().zip(&informative).map(|(c, v)| c * v).sum();
        }
        for j in 0..TOY_NOISE {
            row[TOY_INFORMATIVE + TOY_REDUNDANT + j] = standard_normal(&mut rng);
        }
    }
    let names = (0..TOY_INFORMATIVE)
        .map(|k| format!("informative_{k}"))
        .chain((0..TOY_REDUNDANT).map(|k| format!("redundant_{k}")))
        .chain((0..TOY_NOISE).map(|k| format!("noise_{k}")))
        .collect();
    let dataset = Dataset::new(names, features, labels).expect("generator shapes agree");
    ToyDataset {
        dataset,
        cluster,
        mixing,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseKind {
    /// One tight anomaly blob just off the normal manifold.
    Clustered,
    /// Anomalies uniform over a box, outside every normal component's 3σ ellipse.
    Scattered,
    /// Training anomalies are a blob plus scattered points; the test set adds
    /// a cluster on the far right that never appears in training.
    Novel,
}

impl std::fmt::Display for CaseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CaseKind::Clustered => "clustered",
            CaseKind::Scattered => "scattered",
            CaseKind::Novel => "novel",
        })
    }
}

impl std::str::FromStr for CaseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "clustered" => Ok(CaseKind::Clustered),
            "scattered" => Ok(CaseKind::Scattered),
            "novel" => Ok(CaseKind::Novel),
            other => Err(Error::InvalidParameter(format!(
                "unknown case kind `{other}`"
            ))),
        }
    }
}

/// Two-dimensional normal mixture: `(center, std)` per component, equal weights.
pub const CASE_NORMAL_COMPONENTS: [([f64; 2], [f64; 2]); 2] =
    [([-1.5, 0.0], [0.7, 0.5]), ([1.5, 0.0], [0.7, 0.5])];
pub const CASE_BLOB_CENTER: [f64; 2] = [0.0, 2.4];
pub const CASE_BLOB_STD: f64 = 0.25;
pub const CASE_NOVEL_CENTER: [f64; 2] = [5.0, 0.0];
pub const CASE_NOVEL_STD: f64 = 0.25;
/// Training anomalies keep at least this distance from the novel center.
pub const CASE_NOVEL_EXCLUSION: f64 = 1.5;
const CASE_BOX: [f64; 4] = [-6.0, 6.0, -4.0, 4.0];
pub const CASE_ANOMALY_FRACTION: f64 = 0.05;

/// Whether a point lies inside the 3σ ellipse of any normal component.
pub fn inside_normal_support(p: [f64; 2]) -> bool {
    CASE_NORMAL_COMPONENTS.iter().any(|(c, s)| {
        let dx = (p[0] - c[0]) / s[0];
        let dy = (p[1] - c[1]) / s[1];
        dx * dx + dy * dy <= 9.0
    })
}

fn sample_normal_point<R: Rng + ?Sized>(rng: &mut R) -> [f64; 2] {
    let (c, s) = CASE_NORMAL_COMPONENTS[rng.random_range(0..CASE_NORMAL_COMPONENTS.len())];
    [
        c[0] + s[0] * standard_normal(rng),
        c[1] + s[1] * standard_normal(rng),
    ]
}

fn sample_blob<R: Rng + ?Sized>(center: [f64; 2], std: f64, rng: &mut R) -> [f64; 2] {
    [
        center[0] + std * standard_normal(rng),
        center[1] + std * standard_normal(rng),
    ]
}

fn sample_scattered<R: Rng + ?Sized>(rng: &mut R, avoid_novel: bool) -> [f64; 2] {
    loop {
        let p = [
            rng.random_range(CASE_BOX[0]..CASE_BOX[1]),
            rng.random_range(CASE_BOX[2]..CASE_BOX[3]),
        ];
        let near_novel =
            ((p[0] - CASE_NOVEL_CENTER[0]).powi(2) + (p[1] - CASE_NOVEL_CENTER[1]).powi(2)).sqrt()
                < CASE_NOVEL_EXCLUSION;
        if !inside_normal_support(p) && !(avoid_novel && near_novel) {
            return p;
        }
    }
}

fn sample_blob_outside_support<R: Rng + ?Sized>(
    center: [f64; 2],
    std: f64,
    rng: &mut R,
) -> [f64; 2] {
    loop {
        let p = sample_blob(center, std, rng);
        if !inside_normal_support(p) {
            return p;
        }
    }
}

fn case_split<R: Rng + ?Sized>(kind: CaseKind, n: usize, test: bool, rng: &mut R) -> Dataset {
    let n_anom = ((n as f64) * CASE_ANOMALY_FRACTION).round() as usize;
    let mut features = Array2::zeros((n, 2));
    let mut labels = vec![0u8; n];
    for i in 0..n {
        let anomaly_rank = i.checked_sub(n - n_anom);
        let p = match (anomaly_rank, kind) {
            (None, _) => sample_normal_point(rng),
            (Some(_), CaseKind::Clustered) => sample_blob(CASE_BLOB_CENTER, CASE_BLOB_STD, rng),
            (Some(_), CaseKind::Scattered) => sample_scattered(rng, false),
            (Some(r), CaseKind::Novel) => match (test, r % 3) {
                (true, 2) => sample_blob_outside_support(CASE_NOVEL_CENTER, CASE_NOVEL_STD, rng),
                (_, k) if k % 2 == 0 => sample_blob(CASE_BLOB_CENTER, CASE_BLOB_STD, rng),
                _ => sample_scattered(rng, true),
            },
        };
        if anomaly_rank.is_some() {
            labels[i] = 1;
        }
        features[[i, 0]] = p[0];
        features[[i, 1]] = p[1];
    }
    // Shuffle rows so anomalies are not grouped at the end.
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let features = features.select(Axis(0), &order);
    let labels = order.iter().map(|&i| labels[i]).collect();
    Dataset::new(vec!["x".into(), "y".into()], features, labels).expect("generator shapes agree")
}

/// Train and test sets of one two-dimensional anomaly-type case, `n` rows each,
/// 5% anomalies.
pub fn generate_case(kind: CaseKind, n: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    if n < 100 {
        return Err(Error::InvalidParameter(format!(
            "case generator needs n >= 100, got {n}"
        )));
    }
    let mut rng = rng::stream(seed, Stream::Synthesis);
    let train = case_split(kind, n, false, &mut rng);
    let test = case_split(kind, n, true, &mut rng);
    Ok((train, test))
}
