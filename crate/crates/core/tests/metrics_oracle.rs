mod common;

use proptest::prelude::*;
use rosas::eval::{auc_pr, auc_roc};

/// Scores drawn from a small grid so ties are common.
fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
    (2usize..=50).prop_flat_map(|n| {
        (
            prop::collection::vec((0u8..12).prop_map(|k| k as f64 / 11.0), n),
            prop::collection::vec(0u8..=1, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn roc_matches_pairwise_count((scores, labels) in instance()) {
        let pos = labels.iter().filter(|&&l| l == 1).count();
        prop_assume!(pos > 0 && pos < labels.len());
        prop_assert_eq!(auc_roc(&scores, &labels).unwrap(), common::pairwise_auc(&scores, &labels));
    }

    #[test]
    fn pr_matches_threshold_walk((scores, labels) in instance()) {
        prop_assume!(labels.contains(&1));
        prop_assert_eq!(auc_pr(&scores, &labels).unwrap(), common::walked_average_precision(&scores, &labels));
    }

    #[test]
    fn metrics_ignore_monotone_transforms((scores, labels) in instance()) {
        prop_assume!(labels.contains(&1) && labels.contains(&0));
        let squashed: Vec<f64> = scores.iter().map(|s| (3.0 * s - 1.0).tanh()).collect();
        prop_assert_eq!(auc_roc(&scores, &labels).unwrap(), auc_roc(&squashed, &labels).unwrap());
        prop_assert_eq!(auc_pr(&scores, &labels).unwrap(), auc_pr(&squashed, &labels).unwrap());
    }

    #[test]
    fn metrics_lie_in_unit_interval((scores, labels) in instance()) {
        prop_assume!(labels.contains(&1) && labels.contains(&0));
        let roc = auc_roc(&scores, &labels).unwrap();
        let pr = auc_pr(&scores, &labels).unwrap();
        prop_assert!((0.0..=1.0).contains(&roc));
        prop_assert!(pr > 0.0 && pr <= 1.0);
    }
}

#[test]
fn boundary_instances() {
    // All tied.
    let labels = [1, 0, 0, 1, 0];
    let tied = [0.4; 5];
    assert_eq!(
        auc_roc(&tied, &labels).unwrap(),
        common::pairwise_auc(&tied, &labels)
    );
    assert_eq!(
        auc_pr(&tied, &labels).unwrap(),
        common::walked_average_precision(&tied, &labels)
    );
    assert_eq!(auc_pr(&tied, &labels).unwrap(), 0.4);
    // Perfect ranking.
    let perfect = [0.9, 0.1, 0.2, 0.8, 0.3];
    assert_eq!(auc_roc(&perfect, &labels).unwrap(), 1.0);
    assert_eq!(auc_pr(&perfect, &labels).unwrap(), 1.0);
    // Inverted ranking.
    let inverted: Vec<f64> = perfect.iter().map(|s| -s).collect();
    assert_eq!(auc_roc(&inverted, &labels).unwrap(), 0.0);
}
