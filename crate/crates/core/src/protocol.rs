//! Data preparation for an experiment run.
//!
//! Split (stratified 60:20:20), pick the labeled anomalies, bring the
//! unlabeled pool to the target contamination, then min-max normalize with
//! training statistics. Each step draws from its own seeded stream.

use serde::{Deserialize, Serialize};

use crate::data::{self, ContaminationSpec, Dataset, Role};
use crate::error::{Error, Result};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    pub labeled_anomalies: usize,
    /// Target anomaly share of the unlabeled pool; `None` leaves it as found.
    pub contamination: Option<f64>,
    pub feature_fraction: f64,
    pub split: (f64, f64, f64),
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.contamination {
            if !(0.0..1.0).contains(&t) {
                return Err(Error::InvalidParameter(format!(
                    "contamination must lie in [0, 1), got {t}"
                )));
            }
        }
        if !(self.feature_fraction > 0.0 && self.feature_fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "feature fraction must lie in (0, 1], got {}",
                self.feature_fraction
            )));
        }
        Ok(())
    }
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            labeled_anomalies: 30,
            contamination: Some(0.02),
            feature_fraction: 0.05,
            split: (0.6, 0.2, 0.2),
        }
    }
}

fn label_and_contaminate(dataset: Dataset, config: &ProtocolConfig, seed: u64) -> Result<Dataset> {
    config.validate()?;
    let dataset = data::select_labeled_anomalies(
        dataset,
        config.labeled_anomalies,
        &mut rng::stream(seed, Stream::Labeling),
    )?;
    let dataset = match config.contamination {
        Some(target) => data::adjust_contamination(
            dataset,
            &ContaminationSpec {
                target_ratio: target,
                feature_fraction: config.feature_fraction,
            },
            &mut rng::stream(seed, Stream::Contamination),
        )?,
        None => dataset,
    };
    Ok(dataset)
}

/// Every step except normalization: rows keep their raw values.
pub fn assign_roles(dataset: Dataset, config: &ProtocolConfig, seed: u64) -> Result<Dataset> {
    let dataset = data::split_dataset(
        dataset,
        config.split,
        &mut rng::stream(seed, Stream::Splits),
    )?;
    label_and_contaminate(dataset, config, seed)
}

/// Full pipeline on a single labeled dataset.
pub fn prepare(dataset: Dataset, config: &ProtocolConfig, seed: u64) -> Result<Dataset> {
    data::minmax_normalize(assign_roles(dataset, config, seed)?)
}

/// [`assign_roles`] for data that already comes as separate train and test
/// sets. There is no validation split.
pub fn assign_roles_train_test(
    train: Dataset,
    test: Dataset,
    config: &ProtocolConfig,
    seed: u64,
) -> Result<Dataset> {
    let combined = train
        .with_roles(Role::Unlabeled)
        .concat(test.with_roles(Role::Test))?;
    label_and_contaminate(combined, config, seed)
}

/// Full pipeline on separate train and test sets.
pub fn prepare_train_test(
    train: Dataset,
    test: Dataset,
    config: &ProtocolConfig,
    seed: u64,
) -> Result<Dataset> {
    data::minmax_normalize(assign_roles_train_test(train, test, config, seed)?)
}
