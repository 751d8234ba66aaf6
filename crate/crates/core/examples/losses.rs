//! The pieces of the training objective evaluated on a small network:
//! the interpolation scoring loss, the triplet regularizer, and the dynamic
//! weight that blends them.
//!
//! `cargo run --release --example losses`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rosas::data::{generate_toy, ToyConfig};
use rosas::losses::{self, AblationMode, LossConfig, LossState, WeightPolicy};
use rosas::protocol::{prepare, ProtocolConfig};
use rosas::rng::{stream, Stream};
use rosas::scorer::build_scorer;
use rosas::supervision::augment_batch;
use rosas::trainer::sample_batches;

fn main() -> rosas::Result<()> {
    let prepared = prepare(
        generate_toy(&ToyConfig::new(2000), 3).dataset,
        &ProtocolConfig::default(),
        3,
    )?;
    let (anomalies, unlabeled) = prepared.training_pools();
    let scorer = build_scorer(prepared.n_features(), 16, 3)?;
    let mut rng = stream(3, Stream::Batching);
    let batch = sample_batches(anomalies.view(), unlabeled.view(), 16, &mut rng)?;
    let augmented = augment_batch(
        &batch.sources(),
        2,
        0.5,
        32,
        &mut ChaCha8Rng::seed_from_u64(4),
    )?;

    for mode in AblationMode::ALL {
        let config = LossConfig {
            mode,
            ..LossConfig::default()
        };
        let value = losses::objective_value(
            &scorer,
            &batch,
            &augmented,
            &config,
            WeightPolicy::Fixed(0.5),
        )?;
        println!(
            "{:<18} scoring {:.8}  regularizer {}",
            mode.as_str(),
            value.scoring,
            value.regularizer.map_or("-".into(), |r| format!("{r:.5}"))
        );
    }

    // An untrained network is close to affine over a batch, so the
    // consistency term starts out tiny.
    let value = |mode| {
        let config = LossConfig {
            mode,
            ..LossConfig::default()
        };
        losses::objective_value(
            &scorer,
            &batch,
            &augmented,
            &config,
            WeightPolicy::Fixed(0.5),
        )
        .map(|v| v.scoring)
    };
    println!(
        "consistency term at initialization: {:.3e}",
        value(AblationMode::Full)? - value(AblationMode::NoConsistency)?
    );

    // Dynamic weight: the loss that has fallen least relative to its last
    // epoch average gets the larger share.
    let mut state = LossState::new(losses::DEFAULT_TEMPERATURE)?;
    println!(
        "\nw(L=2, L'=1) with fresh averages: {:.5}",
        losses::dynamic_weight(2.0, 1.0, &state)
    );
    state.update_epoch_averages(&[4.0, 4.0], &[0.5, 0.5])?;
    println!(
        "w(L=2, L'=1) after averages 4 / 0.5: {:.5}",
        losses::dynamic_weight(2.0, 1.0, &state)
    );
    Ok(())
}
