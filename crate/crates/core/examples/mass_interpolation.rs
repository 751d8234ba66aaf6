//! Mixes labeled anomalies (+1) with unlabeled rows (-1) into samples with
//! continuous targets, and shows the U-shaped weight distribution.
//!
//! `cargo run --release --example mass_interpolation`

use ndarray::arr1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rosas::supervision::{augment_batch, sample_weights, LabeledSample};

fn main() -> rosas::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let batch = vec![
        LabeledSample::anomaly(arr1(&[1.0, 1.0])),
        LabeledSample::anomaly(arr1(&[0.9, 0.8])),
        LabeledSample::unlabeled(arr1(&[0.1, 0.2])),
        LabeledSample::unlabeled(arr1(&[0.0, 0.3])),
    ];
    for a in augment_batch(&batch, 2, 0.5, 6, &mut rng)? {
        println!(
            "sources {:?}  lambdas [{:.3}, {:.3}]  x [{:.3}, {:.3}]  target {:+.3}",
            a.sources, a.lambdas[0], a.lambdas[1], a.x[0], a.x[1], a.y
        );
    }

    // Histogram of the first weight for k = 2, alpha = 0.5.
    let mut bins = [0usize; 10];
    let draws = 50_000;
    for _ in 0..draws {
        let l = sample_weights(2, 0.5, &mut rng)?[0];
        bins[((l * 10.0) as usize).min(9)] += 1;
    }
    println!("\nweight histogram");
    for (i, count) in bins.iter().enumerate() {
        let share = *count as f64 / draws as f64;
        println!(
            "[{:.1}, {:.1})  {:5.3}  {}",
            i as f64 / 10.0,
            (i + 1) as f64 / 10.0,
            share,
            "#".repeat((share * 200.0) as usize)
        );
    }
    Ok(())
}
