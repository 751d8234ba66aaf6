//! Command implementations behind the `rosas` binary.
//!
//! Every command writes exactly one run manifest (`<command>.manifest.json`)
//! into its output directory. Argument parsing lives in the binary; these
//! functions take plain request structs so they can be driven from tests.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::artifact::{self, ModelArtifact, RunManifest};
use crate::data::{self, CaseKind, Dataset, Role, ToyConfig};
use crate::error::{Error, Result};
use crate::eval::{self, MetricsReport};
use crate::protocol::{self, ProtocolConfig};
use crate::rng;
use crate::trainer::{self, TrainConfig, TrainHistory};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ROSAS_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "rosas-out";
pub const DEFAULT_LABEL_COLUMN: &str = "label";

pub const MODEL_FILE: &str = "model.rosas";
pub const HISTORY_FILE: &str = "history.json";
pub const TEST_SPLIT_FILE: &str = "test.csv";
pub const SWEEP_FILE: &str = "sweep.csv";

/// Column order of the sweep table.
pub const SWEEP_COLUMNS: [&str; 7] = [
    "setting_kind",
    "setting_value",
    "repeat",
    "seed",
    "auc_pr",
    "auc_roc",
    "status",
];

/// Settings loadable from a TOML file with optional `[train]` and `[protocol]` tables.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub protocol: ProtocolConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }
}

fn manifest_path(out: &Path, command: &str) -> PathBuf {
    out.join(format!("{command}.manifest.json"))
}

fn finish_manifest(mut manifest: RunManifest, out: &Path, started: Instant) -> Result<RunManifest> {
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    manifest.save(manifest_path(out, &manifest.command))?;
    Ok(manifest)
}

#[derive(Debug, Clone)]
pub struct TrainRequest {
    pub data: PathBuf,
    pub label_column: String,
    /// Optional separate test set; when present the whole `data` file is
    /// used for training and there is no validation split.
    pub test_data: Option<PathBuf>,
    pub out: PathBuf,
    pub config: RunConfig,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub artifact: ModelArtifact,
    pub history: TrainHistory,
    /// Metrics on the held-out test rows, when they contain both classes.
    pub test_report: Option<MetricsReport>,
    pub manifest: RunManifest,
}

/// Prepares the data, trains, and writes `model.rosas`, `history.json`,
/// `test.csv` (raw held-out rows) and `train.manifest.json` into `out`.
pub fn cmd_train(request: &TrainRequest) -> Result<TrainOutcome> {
    let started = Instant::now();
    let RunConfig { train, protocol } = &request.config;
    if protocol.labeled_anomalies == 0 {
        return Err(Error::InvalidParameter(
            "at least one labeled anomaly is required".into(),
        ));
    }
    train.validate()?;
    protocol.validate()?;
    let seed = train.seed;

    let raw = match &request.test_data {
        None => protocol::assign_roles(
            data::load_csv(&request.data, &request.label_column)?,
            protocol,
            seed,
        )?,
        Some(test_path) => protocol::assign_roles_train_test(
            data::load_csv(&request.data, &request.label_column)?,
            data::load_csv(test_path, &request.label_column)?,
            protocol,
            seed,
        )?,
    };
    let prepared = data::minmax_normalize(raw.clone())?;

    fs::create_dir_all(&request.out)?;
    let test_raw = raw.test_view();
    let test_set = Dataset::new(
        raw.feature_names.clone(),
        test_raw.features,
        test_raw.labels,
    )?;
    data::save_csv(
        &test_set,
        request.out.join(TEST_SPLIT_FILE),
        &request.label_column,
    )?;

    let (scorer, history) = trainer::train(&prepared, train)?;
    let test = prepared.test_view();
    let test_report = if test.labels.contains(&0) && test.labels.contains(&1) {
        let scores = trainer::predict(&scorer, test.features.view())?;
        Some(eval::evaluate(
            scores.as_slice().expect("contiguous"),
            &test.labels,
        )?)
    } else {
        None
    };

    let artifact = ModelArtifact::new(scorer, prepared.norm.clone(), train.clone())?;
    artifact.save(request.out.join(MODEL_FILE))?;
    fs::write(
        request.out.join(HISTORY_FILE),
        serde_json::to_string_pretty(&history)? + "\n",
    )?;

    let mut manifest = RunManifest::new("train", &request.config)?;
    manifest.dataset_fingerprint = Some(match &request.test_data {
        None => artifact::file_fingerprint(&request.data)?,
        Some(t) => artifact::sha256_hex(
            (artifact::file_fingerprint(&request.data)? + &artifact::file_fingerprint(t)?)
                .as_bytes(),
        ),
    });
    manifest.seed = Some(seed);
    manifest.metrics = test_report;
    manifest.outputs = [MODEL_FILE, HISTORY_FILE, TEST_SPLIT_FILE]
        .map(String::from)
        .to_vec();
    let manifest = finish_manifest(manifest, &request.out, started)?;
    Ok(TrainOutcome {
        artifact,
        history,
        test_report,
        manifest,
    })
}

#[derive(Debug, Clone)]
pub struct EvaluateRequest {
    pub model: PathBuf,
    pub data: PathBuf,
    pub label_column: String,
    pub out: PathBuf,
}

/// Scores the labeled rows of `data` with the model and reports both metrics.
/// The label column must exist.
pub fn cmd_evaluate(request: &EvaluateRequest) -> Result<(MetricsReport, RunManifest)> {
    let started = Instant::now();
    let model = ModelArtifact::load(&request.model)?;
    let ds = data::load_csv(&request.data, &request.label_column)?;
    let scores = model.score_raw(ds.features.view())?;
    let report = eval::evaluate(&scores, &ds.labels)?;

    fs::create_dir_all(&request.out)?;
    let mut manifest = RunManifest::new(
        "evaluate",
        &serde_json::json!({
            "model": artifact::file_fingerprint(&request.model)?,
            "label_column": request.label_column,
        }),
    )?;
    manifest.dataset_fingerprint = Some(artifact::file_fingerprint(&request.data)?);
    manifest.seed = Some(model.seed);
    manifest.metrics = Some(report);
    let manifest = finish_manifest(manifest, &request.out, started)?;
    Ok((report, manifest))
}

#[derive(Debug, Clone)]
pub struct ScoreRequest {
    pub model: PathBuf,
    pub data: PathBuf,
    /// Dropped from the input if present, so labeled files can be scored too.
    pub label_column: Option<String>,
    /// Destination of the `row,score` CSV.
    pub output: PathBuf,
    pub out: PathBuf,
}

/// Writes one `row,score` line per input row, in input order. Labels are
/// never read.
pub fn cmd_score(request: &ScoreRequest) -> Result<(Vec<f64>, RunManifest)> {
    let started = Instant::now();
    let model = ModelArtifact::load(&request.model)?;
    let ds = data::load_features_csv(&request.data, request.label_column.as_deref())?;
    let scores = if ds.n_rows() == 0 {
        crate::error::check_dim("feature count", model.scorer.input_dim(), ds.n_features())?;
        Vec::new()
    } else {
        model.score_raw(ds.features.view())?
    };
    if let Some(parent) = request
        .output
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
    {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(&request.output)?;
    w.write_record(["row", "score"])?;
    for (i, s) in scores.iter().enumerate() {
        w.write_record([i.to_string(), format!("{s:?}")])?;
    }
    w.flush()?;

    fs::create_dir_all(&request.out)?;
    let mut manifest = RunManifest::new(
        "score",
        &serde_json::json!({ "model": artifact::file_fingerprint(&request.model)? }),
    )?;
    manifest.dataset_fingerprint = Some(artifact::file_fingerprint(&request.data)?);
    manifest.seed = Some(model.seed);
    manifest.outputs = vec![request.output.display().to_string()];
    let manifest = finish_manifest(manifest, &request.out, started)?;
    Ok((scores, manifest))
}

/// What to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    Toy,
    Case(CaseKind),
}

impl std::str::FromStr for SynthKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "toy" {
            Ok(SynthKind::Toy)
        } else {
            s.parse().map(SynthKind::Case)
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthesizeRequest {
    pub kind: SynthKind,
    pub n: usize,
    pub anomaly_fraction: Option<f64>,
    pub seed: u64,
    pub label_column: String,
    pub out: PathBuf,
}

/// Writes `toy.csv`, or `<case>-train.csv` and `<case>-test.csv`. Returns the paths.
pub fn cmd_synthesize(request: &SynthesizeRequest) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    fs::create_dir_all(&request.out)?;
    let mut written = Vec::new();
    match request.kind {
        SynthKind::Toy => {
            let mut config = ToyConfig::new(request.n);
            if let Some(f) = request.anomaly_fraction {
                config.anomaly_fraction = f;
            }
            let toy = data::generate_toy(&config, request.seed);
            let path = request.out.join("toy.csv");
            data::save_csv(&toy.dataset, &path, &request.label_column)?;
            written.push(path);
        }
        SynthKind::Case(kind) => {
            let (train, test) = data::generate_case(kind, request.n, request.seed)?;
            for (part, ds) in [("train", train), ("test", test)] {
                let path = request.out.join(format!("{kind}-{part}.csv"));
                data::save_csv(&ds, &path, &request.label_column)?;
                written.push(path);
            }
        }
    }
    let mut manifest = RunManifest::new(
        "synthesize",
        &serde_json::json!({
            "kind": request.kind,
            "n": request.n,
            "anomaly_fraction": request.anomaly_fraction,
        }),
    )?;
    manifest.seed = Some(request.seed);
    manifest.outputs = written.iter().map(|p| p.display().to_string()).collect();
    finish_manifest(manifest, &request.out, started)?;
    Ok(written)
}

#[derive(Debug, Clone)]
pub struct SweepRequest {
    /// Input CSV; `None` generates toy data of `toy_rows` rows per cell.
    pub data: Option<PathBuf>,
    pub toy_rows: usize,
    pub label_column: String,
    pub contamination_levels: Vec<f64>,
    pub labeled_budgets: Vec<usize>,
    pub repeats: usize,
    /// Base settings; each cell overrides one protocol field and the seed.
    pub config: RunConfig,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub setting_kind: String,
    pub setting_value: f64,
    pub repeat: usize,
    pub seed: u64,
    pub auc_pr: Option<f64>,
    pub auc_roc: Option<f64>,
    /// `ok`, or the error kind and message of a failed cell.
    pub status: String,
}

/// Runs every (setting, repeat) cell of the grid: contamination levels first,
/// then labeled budgets. Cell `i` trains with seed `derive_seed(seed, i)`.
/// A failing cell is recorded in its row and does not stop the sweep.
pub fn cmd_sweep(request: &SweepRequest) -> Result<Vec<SweepRow>> {
    let started = Instant::now();
    let base = &request.config;
    base.train.validate()?;
    let loaded = match &request.data {
        Some(path) => Some(data::load_csv(path, &request.label_column)?),
        None => None,
    };

    let mut cells: Vec<(&str, f64, ProtocolConfig)> = Vec::new();
    for &level in &request.contamination_levels {
        cells.push((
            "contamination",
            level,
            ProtocolConfig {
                contamination: Some(level),
                ..base.protocol
            },
        ));
    }
    for &budget in &request.labeled_budgets {
        cells.push((
            "labeled_anomalies",
            budget as f64,
            ProtocolConfig {
                labeled_anomalies: budget,
                ..base.protocol
            },
        ));
    }

    let mut rows = Vec::new();
    for (kind, value, protocol) in cells {
        for repeat in 0..request.repeats {
            let seed = rng::derive_seed(base.train.seed, rows.len() as u64);
            let outcome = run_cell(
                loaded.as_ref(),
                request.toy_rows,
                &protocol,
                &base.train,
                seed,
            );
            let (auc_pr, auc_roc, status) = match outcome {
                Ok(r) => (Some(r.auc_pr), Some(r.auc_roc), "ok".to_string()),
                Err(e) => (None, None, format!("{}: {e}", e.kind())),
            };
            rows.push(SweepRow {
                setting_kind: kind.to_string(),
                setting_value: value,
                repeat,
                seed,
                auc_pr,
                auc_roc,
                status,
            });
        }
    }

    fs::create_dir_all(&request.out)?;
    let path = request.out.join(SWEEP_FILE);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(SWEEP_COLUMNS)?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
    for r in &rows {
        w.write_record([
            r.setting_kind.clone(),
            format!("{:?}", r.setting_value),
            r.repeat.to_string(),
            r.seed.to_string(),
            opt(r.auc_pr),
            opt(r.auc_roc),
            r.status.clone(),
        ])?;
    }
    w.flush()?;

    let mut manifest = RunManifest::new(
        "sweep",
        &serde_json::json!({
            "config": base,
            "contamination_levels": request.contamination_levels,
            "labeled_budgets": request.labeled_budgets,
            "repeats": request.repeats,
            "toy_rows": request.toy_rows,
        }),
    )?;
    manifest.dataset_fingerprint = match &request.data {
        Some(p) => Some(artifact::file_fingerprint(p)?),
        None => None,
    };
    manifest.seed = Some(base.train.seed);
    manifest.outputs = vec![path.display().to_string()];
    finish_manifest(manifest, &request.out, started)?;
    Ok(rows)
}

fn run_cell(
    loaded: Option<&Dataset>,
    toy_rows: usize,
    protocol: &ProtocolConfig,
    train: &TrainConfig,
    seed: u64,
) -> Result<MetricsReport> {
    let dataset = match loaded {
        Some(ds) => ds.clone(),
        None => data::generate_toy(&ToyConfig::new(toy_rows), seed).dataset,
    };
    let raw = protocol::assign_roles(dataset, protocol, seed)?;
    let labeled = raw.count(Role::LabeledAnomaly, None);
    if labeled < protocol.labeled_anomalies {
        return Err(Error::UnusableDataset(format!(
            "budget of {} labeled anomalies exceeds the {labeled} available",
            protocol.labeled_anomalies
        )));
    }
    let prepared = data::minmax_normalize(raw)?;
    let config = TrainConfig {
        seed,
        ..train.clone()
    };
    let (scorer, _) = trainer::train(&prepared, &config)?;
    let test = prepared.test_view();
    let scores = trainer::predict(&scorer, test.features.view())?;
    eval::evaluate(scores.as_slice().expect("contiguous"), &test.labels)
}

/// Machine-readable error record printed by the binary on failure.
pub fn error_record(error: &Error) -> serde_json::Value {
    serde_json::json!({
        "error": error.kind(),
        "message": error.to_string(),
    })
}
