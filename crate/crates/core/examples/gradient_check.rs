//! Compares backpropagated gradients of the blended objective with central
//! finite differences on a random small network.
//!
//! `cargo run --release --example gradient_check`

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rosas::losses::{self, LossConfig, MiniBatch, WeightPolicy};
use rosas::nn::Parameters;
use rosas::scorer::build_scorer;
use rosas::supervision::augment_batch;

fn main() -> rosas::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (d, h, b) = (4, 6, 3);
    let mut random = |r: usize| Array2::from_shape_fn((r, d), |_| rng.random_range(0.0..1.0));
    let batch = MiniBatch {
        anomalies: random(b),
        unlabeled: random(b),
        anchors: random(b),
    };
    let augmented = augment_batch(
        &batch.sources(),
        2,
        0.5,
        2 * b,
        &mut ChaCha8Rng::seed_from_u64(9),
    )?;
    let scorer = build_scorer(d, h, 10)?;
    let config = LossConfig::default();
    let policy = WeightPolicy::Fixed(0.6);
    let (_, tape) = losses::objective(&scorer, &batch, &augmented, &config, policy)?;

    let step = 1e-6;
    let mut probe = scorer.clone();
    let grads = tape.tensors();
    for (t, (name, analytic)) in grads.iter().enumerate() {
        let mut worst: f64 = 0.0;
        for j in 0..analytic.len() {
            let original = probe.params.tensors()[t].1[j];
            probe.params.tensors_mut()[t].1[j] = original + step;
            let plus = losses::objective_value(&probe, &batch, &augmented, &config, policy)?.total;
            probe.params.tensors_mut()[t].1[j] = original - step;
            let minus = losses::objective_value(&probe, &batch, &augmented, &config, policy)?.total;
            probe.params.tensors_mut()[t].1[j] = original;
            let numeric = (plus - minus) / (2.0 * step);
            worst = worst
                .max((analytic[j] - numeric).abs() / (analytic[j].abs() + numeric.abs()).max(1e-8));
        }
        println!(
            "{name:<20} {:>4} entries  worst relative error {worst:.2e}",
            analytic.len()
        );
    }
    Ok(())
}
