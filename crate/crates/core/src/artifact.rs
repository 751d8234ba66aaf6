//! Model files and run manifests.
//!
//! A model file is line-oriented UTF-8 text:
//!
//! ```text
//! rosas-model v1
//! input_dim 10
//! rep_dim 128
//! rep_hidden 69
//! score_hidden 64
//! slope 0.01
//! seed 7
//! config {"batch_size":32,...}
//! norm_min 0.0 -1.5 ...
//! norm_max 1.0 2.25 ...
//! tensor rep_hidden.weights 690
//! 0.0123 -0.087 ...
//! tensor rep_hidden.bias 69
//! ...
//! end
//! ```
//!
//! Floats use the shortest representation that parses back to the same
//! 64-bit value, so save and load are lossless. Weight matrices are stored
//! row-major as `[out, in]`. Tensors appear in the fixed order
//! `rep_hidden`, `rep_out`, `score_hidden`, `score_out`, weights before bias.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::NormState;
use crate::error::{Error, Result};
use crate::eval::MetricsReport;
use crate::nn::Parameters;
use crate::scorer::{Architecture, Scorer, ScorerParams};
use crate::trainer::TrainConfig;

pub const FORMAT_MAGIC: &str = "rosas-model";
pub const FORMAT_VERSION: u32 = 1;

/// A trained scorer together with everything needed to score raw rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelArtifact {
    pub scorer: Scorer,
    /// Applied to raw features before scoring.
    pub norm: NormState,
    pub config: TrainConfig,
    pub seed: u64,
}

impl ModelArtifact {
    pub fn new(scorer: Scorer, norm: Option<NormState>, config: TrainConfig) -> Result<Self> {
        let d = scorer.input_dim();
        let norm = norm.unwrap_or_else(|| NormState::identity(d));
        if norm.dim() != d || norm.max.len() != d {
            return Err(Error::ShapeMismatch {
                context: "normalization width",
                expected: d,
                found: norm.dim(),
            });
        }
        let seed = config.seed;
        Ok(Self {
            scorer,
            norm,
            config,
            seed,
        })
    }

    /// Normalizes raw rows with the stored statistics, then scores them.
    pub fn score_raw(&self, features: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        crate::error::check_dim("feature count", self.scorer.input_dim(), features.ncols())?;
        let normalized = self.norm.apply(&features.to_owned())?;
        Ok(self.scorer.score_batch(normalized.view())?.to_vec())
    }

    pub fn to_text(&self) -> Result<String> {
        let arch = self.scorer.architecture();
        let mut out = String::new();
        let config = serde_json::to_string(&self.config)?;
        writeln!(out, "{FORMAT_MAGIC} v{FORMAT_VERSION}").unwrap();
        writeln!(out, "input_dim {}", arch.input_dim).unwrap();
        writeln!(out, "rep_dim {}", arch.rep_dim).unwrap();
        writeln!(out, "rep_hidden {}", arch.rep_hidden).unwrap();
        writeln!(out, "score_hidden {}", arch.score_hidden).unwrap();
        writeln!(out, "slope {:?}", self.scorer.slope).unwrap();
        writeln!(out, "seed {}", self.seed).unwrap();
        writeln!(out, "config {config}").unwrap();
        writeln!(out, "norm_min {}", join(&self.norm.min)).unwrap();
        writeln!(out, "norm_max {}", join(&self.norm.max)).unwrap();
        for (name, values) in self.scorer.params.tensors() {
            writeln!(out, "tensor {name} {}", values.len()).unwrap();
            writeln!(out, "{}", join(values)).unwrap();
        }
        out.push_str("end\n");
        Ok(out)
    }

    /// Parses a model file. The version line is checked before anything
    /// else, then every shape, then finiteness of all numbers.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let header = lines.next("format header")?;
        let expected = format!("{FORMAT_MAGIC} v{FORMAT_VERSION}");
        if header != expected {
            return match header.strip_prefix(FORMAT_MAGIC) {
                Some(rest) => Err(Error::UnsupportedVersion(rest.trim().to_string())),
                None => Err(corrupt("missing format header")),
            };
        }

        let input_dim: usize = lines.field("input_dim")?;
        let rep_dim: usize = lines.field("rep_dim")?;
        let rep_hidden: usize = lines.field("rep_hidden")?;
        let score_hidden: usize = lines.field("score_hidden")?;
        let arch = Architecture::with_hidden(input_dim, rep_dim, rep_hidden, score_hidden)?;
        let slope: f64 = lines.field("slope")?;
        let seed: u64 = lines.field("seed")?;
        let config: TrainConfig = serde_json::from_str(lines.keyed("config")?)
            .map_err(|e| corrupt(&format!("config: {e}")))?;

        let norm_min = parse_floats(lines.keyed("norm_min")?)?;
        let norm_max = parse_floats(lines.keyed("norm_max")?)?;
        for (what, v) in [("norm_min", &norm_min), ("norm_max", &norm_max)] {
            if v.len() != input_dim {
                return Err(Error::ShapeMismatch {
                    context: what,
                    expected: input_dim,
                    found: v.len(),
                });
            }
        }

        let mut params = ScorerParams::zeros(arch);
        for (name, slot) in params.tensors_mut() {
            let spec = lines.keyed("tensor")?;
            let (found_name, len) = spec
                .split_once(' ')
                .ok_or_else(|| corrupt(&format!("bad tensor line '{spec}'")))?;
            if found_name != name {
                return Err(corrupt(&format!(
                    "expected tensor {name}, found {found_name}"
                )));
            }
            let len: usize = len
                .parse()
                .map_err(|_| corrupt(&format!("bad length for {name}")))?;
            if len != slot.len() {
                return Err(Error::ShapeMismatch {
                    context: "tensor length",
                    expected: slot.len(),
                    found: len,
                });
            }
            let values = parse_floats(lines.next(name)?)?;
            if values.len() != len {
                return Err(corrupt(&format!(
                    "tensor {name} has {} of {len} values",
                    values.len()
                )));
            }
            slot.copy_from_slice(&values);
        }
        if lines.next("end marker")? != "end" {
            return Err(corrupt("missing end marker"));
        }

        let norm = NormState {
            min: norm_min,
            max: norm_max,
        };
        if !norm.is_finite() {
            return Err(corrupt("non-finite normalization statistics"));
        }
        if !params.is_finite() {
            return Err(corrupt("non-finite weight"));
        }
        let scorer = Scorer::from_params(params, slope)?;
        Ok(Self {
            scorer,
            norm,
            config,
            seed,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}

fn corrupt(msg: &str) -> Error {
    Error::CorruptArtifact(msg.to_string())
}

fn join(values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 20);
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{v:?}").unwrap();
    }
    out
}

fn parse_floats(line: &str) -> Result<Vec<f64>> {
    line.split_ascii_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| corrupt(&format!("bad number '{t}'")))
        })
        .collect()
}

struct Lines<'a> {
    inner: std::str::Lines<'a>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines(),
        }
    }

    fn next(&mut self, what: &str) -> Result<&'a str> {
        self.inner
            .next()
            .ok_or_else(|| corrupt(&format!("file ends before {what}")))
    }

    fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next(key)?;
        match line.split_once(' ') {
            Some((k, rest)) if k == key => Ok(rest),
            _ if line == key => Ok(""),
            _ => Err(corrupt(&format!("expected '{key}', found '{line}'"))),
        }
    }

    fn field<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let raw = self.keyed(key)?;
        raw.trim()
            .parse()
            .map_err(|_| corrupt(&format!("bad value for {key}: '{raw}'")))
    }
}

/// Record of one command invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the canonical JSON of `config`.
    pub config_hash: String,
    pub config: serde_json::Value,
    /// SHA-256 of the input data bytes.
    pub dataset_fingerprint: Option<String>,
    pub seed: Option<u64>,
    pub metrics: Option<MetricsReport>,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn new<C: Serialize>(command: &str, config: &C) -> Result<Self> {
        let config = serde_json::to_value(config)?;
        Ok(Self {
            command: command.to_string(),
            config_hash: sha256_hex(serde_json::to_string(&config)?.as_bytes()),
            config,
            dataset_fingerprint: None,
            seed: None,
            metrics: None,
            outputs: Vec::new(),
            wall_clock_seconds: 0.0,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Fingerprint of a file's contents.
pub fn file_fingerprint(path: impl AsRef<Path>) -> Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}
