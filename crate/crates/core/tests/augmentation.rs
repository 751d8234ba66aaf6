use ndarray::Array1;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rosas::supervision::{augment_batch, mix, sample_weights, LabeledSample};

fn batch_strategy() -> impl Strategy<Value = Vec<LabeledSample>> {
    (1usize..=5, 2usize..=12).prop_flat_map(|(d, n)| {
        prop::collection::vec(
            (prop::collection::vec(-5.0f64..5.0, d), any::<bool>()).prop_map(|(x, anomaly)| {
                let x = Array1::from(x);
                if anomaly {
                    LabeledSample::anomaly(x)
                } else {
                    LabeledSample::unlabeled(x)
                }
            }),
            n,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn augmented_samples_are_convex_combinations(
        batch in batch_strategy(),
        k in 2usize..=4,
        alpha in 0.1f64..3.0,
        seed in any::<u64>(),
    ) {
        prop_assume!(batch.len() >= k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let augmented = augment_batch(&batch, k, alpha, 5, &mut rng).unwrap();
        for a in &augmented {
            let total: f64 = a.lambdas.iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
            prop_assert!(a.lambdas.iter().all(|&l| l >= 0.0));
            prop_assert!((-1.0..=1.0).contains(&a.y));
            let mut distinct = a.sources.clone();
            distinct.sort();
            distinct.dedup();
            prop_assert_eq!(distinct.len(), k);
            // Inside the bounding box of its sources, coordinate by coordinate.
            for j in 0..a.x.len() {
                let lo = a.sources.iter().map(|&s| batch[s].x[j]).fold(f64::INFINITY, f64::min);
                let hi = a.sources.iter().map(|&s| batch[s].x[j]).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(a.x[j] >= lo - 1e-12 && a.x[j] <= hi + 1e-12);
            }
            let y: f64 = a.sources.iter().zip(&a.lambdas).map(|(&s, &l)| l * batch[s].y).sum();
            prop_assert!((a.y - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn unit_weight_reproduces_the_source(batch in batch_strategy(), i in 0usize..12, j in 0usize..12) {
        let (i, j) = (i % batch.len(), j % batch.len());
        prop_assume!(i != j);
        let a = mix(&batch, &[i, j], &[1.0, 0.0]).unwrap();
        prop_assert_eq!(&a.x, &batch[i].x);
        prop_assert_eq!(a.y, batch[i].y);
    }

    #[test]
    fn weights_lie_on_the_simplex(k in 2usize..=6, alpha in 0.05f64..5.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = sample_weights(k, alpha, &mut rng).unwrap();
        prop_assert_eq!(w.len(), k);
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(w.iter().all(|&l| (0.0..=1.0).contains(&l)));
    }
}

/// Share of `Beta(0.5, 0.5)` mass outside `[0.1, 0.9]`: `2 · (2/π) · asin(√0.1)`.
pub fn arcsine_tail() -> f64 {
    2.0 * (2.0 / std::f64::consts::PI) * 0.1f64.sqrt().asin()
}

#[test]
fn two_way_weights_follow_the_arcsine_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let draws = 100_000;
    let first: Vec<f64> = (0..draws)
        .map(|_| sample_weights(2, 0.5, &mut rng).unwrap()[0])
        .collect();
    let tail = first.iter().filter(|l| !(0.1..=0.9).contains(*l)).count() as f64 / draws as f64;
    let mean = first.iter().sum::<f64>() / draws as f64;
    assert!((arcsine_tail() - 0.4097).abs() < 1e-3);
    assert!((tail - arcsine_tail()).abs() < 0.03, "tail mass {tail}");
    assert!(tail > 0.35);
    assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
}
