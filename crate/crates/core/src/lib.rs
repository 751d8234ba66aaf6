//! Semi-supervised anomaly detection for tabular data.
//!
//! A small MLP scorer is trained from a handful of labeled anomalies and a
//! (possibly contaminated) unlabeled pool. Supervision comes from
//! interpolating labeled anomalies with unlabeled rows, which yields
//! continuous targets in `[-1, 1]` instead of hard class labels. A margin
//! regularizer on the intermediate representation and a softmax-style
//! dynamic weighting of the two losses complete the objective.
//!
//! The crate is organised bottom-up:
//!
//! - [`nn`]: dense layers, activations and Adam with decoupled weight decay.
//! - [`scorer`]: the representation + scoring network and its backward pass.
//! - [`supervision`]: mass interpolation of mini-batches.
//! - [`losses`]: scoring loss, feature regularizer, dynamic weight, ablations.
//! - [`trainer`]: the training loop, model selection and prediction.
//! - [`data`]: CSV ingestion, normalization, splitting, contamination control
//!   and synthetic generators.
//! - [`eval`]: exact AUC-ROC and average-precision AUC-PR.
//! - [`artifact`] and [`cli`]: model persistence, run manifests and the
//!   command implementations behind the `rosas` binary.
//!
//! ```no_run
//! use rosas::data::{self, ToyConfig};
//! use rosas::protocol::{prepare, ProtocolConfig};
//! use rosas::trainer::{self, TrainConfig};
//!
//! let toy = data::generate_toy(&ToyConfig::new(2000), 7);
//! let prepared = prepare(toy.dataset, &ProtocolConfig::default(), 7).unwrap();
//! let (scorer, _history) = trainer::train(&prepared, &TrainConfig::default()).unwrap();
//! let test = prepared.test_view();
//! let scores = trainer::predict(&scorer, test.features.view()).unwrap();
//! let report = rosas::eval::evaluate(scores.as_slice().unwrap(), &test.labels).unwrap();
//! println!("{report}");
//! ```

// Negated comparisons are used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifact;
pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod losses;
pub mod nn;
pub mod protocol;
pub mod rng;
pub mod scorer;
pub mod supervision;
pub mod trainer;

pub use error::{Error, Result};
pub use scorer::Scorer;
