//! Finite-difference check of the blended objective's analytic gradients.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rosas::losses::{self, AblationMode, LossConfig, MiniBatch, WeightPolicy};
use rosas::nn::Parameters;
use rosas::scorer::{build_scorer, Scorer};
use rosas::supervision;

const STEP: f64 = 1e-6;
const KINK_CLEARANCE: f64 = 1e-3;

pub struct Case {
    pub scorer: Scorer,
    pub batch: MiniBatch,
    pub augmented: Vec<supervision::AugmentedSample>,
    pub weight: f64,
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.5))
}

/// A case whose inputs sit clear of every non-differentiable point.
fn clear_of_kinks(case: &Case) -> bool {
    let s = &case.scorer;
    let rows = case
        .batch
        .anomalies
        .rows()
        .into_iter()
        .chain(case.batch.unlabeled.rows())
        .chain(case.batch.anchors.rows())
        .map(|r| r.to_vec())
        .chain(case.augmented.iter().map(|a| a.x.to_vec()))
        .collect::<Vec<_>>();
    let activations_clear = rows.iter().all(|x| {
        super::hidden_preactivations(s, x)
            .iter()
            .all(|z| z.abs() > KINK_CLEARANCE)
    });
    let hinges_clear = super::hinge_arguments(s, &case.batch, 1.0)
        .iter()
        .all(|a| a.abs() > KINK_CLEARANCE);
    activations_clear && hinges_clear
}

pub fn draw_case(rng: &mut ChaCha8Rng) -> Case {
    loop {
        let d = rng.random_range(1..=6);
        let h = rng.random_range(2..=8);
        let b = rng.random_range(2..=4);
        let scorer = build_scorer(d, h, rng.random()).unwrap();
        let batch = MiniBatch {
            anomalies: random_matrix(rng, b, d),
            unlabeled: random_matrix(rng, b, d),
            anchors: random_matrix(rng, b, d),
        };
        let augmented = supervision::augment_batch(&batch.sources(), 2, 0.5, 2 * b, rng).unwrap();
        let case = Case {
            scorer,
            batch,
            augmented,
            weight: rng.random_range(0.1..0.9),
        };
        if clear_of_kinks(&case) {
            return case;
        }
    }
}

/// Norm-wise relative error between the analytic and numerical gradients.
pub fn relative_error(case: &Case, mode: AblationMode) -> f64 {
    let config = LossConfig {
        mode,
        ..LossConfig::default()
    };
    let (value, tape) = losses::objective(
        &case.scorer,
        &case.batch,
        &case.augmented,
        &config,
        WeightPolicy::Fixed(case.weight),
    )
    .unwrap();
    let reference = super::objective(
        &case.scorer,
        &case.batch,
        &case.augmented,
        mode,
        case.weight,
        1.0,
        1.0,
    );
    assert!(
        (value.total - reference).abs() <= 1e-12 * (1.0 + reference.abs()),
        "{mode}: library objective {} vs reference {reference}",
        value.total
    );

    let analytic: Vec<f64> = tape
        .tensors()
        .into_iter()
        .flat_map(|(_, g)| g.to_vec())
        .collect();
    let mut numeric = Vec::with_capacity(analytic.len());
    let mut probe = case.scorer.clone();
    let n_tensors = probe.params.tensors().len();
    for t in 0..n_tensors {
        let len = probe.params.tensors()[t].1.len();
        for j in 0..len {
            let original = probe.params.tensors()[t].1[j];
            probe.params.tensors_mut()[t].1[j] = original + STEP;
            let plus = super::objective(
                &probe,
                &case.batch,
                &case.augmented,
                mode,
                case.weight,
                1.0,
                1.0,
            );
            probe.params.tensors_mut()[t].1[j] = original - STEP;
            let minus = super::objective(
                &probe,
                &case.batch,
                &case.augmented,
                mode,
                case.weight,
                1.0,
                1.0,
            );
            probe.params.tensors_mut()[t].1[j] = original;
            numeric.push((plus - minus) / (2.0 * STEP));
        }
    }
    let diff: f64 = analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| (a - n).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt()
        + numeric.iter().map(|n| n * n).sum::<f64>().sqrt();
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Worst relative error over `n` random scorers in every mode.
pub fn worst_gradient_error(n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let case = draw_case(&mut rng);
        for mode in AblationMode::ALL {
            worst = worst.max(relative_error(&case, mode));
        }
    }
    worst
}
