//! Replays the training loop by hand from the seeded streams and checks the
//! trainer lands on bit-identical parameters.

use rosas::data::{generate_toy, ToyConfig};
use rosas::losses::{self, LossState, WeightPolicy};
use rosas::nn::Adam;
use rosas::protocol::{prepare, ProtocolConfig};
use rosas::rng::{stream, Stream};
use rosas::scorer::Scorer;
use rosas::supervision::augment_batch;
use rosas::trainer::{self, sample_batches, TrainConfig};

fn config(epochs: usize, batches: usize) -> TrainConfig {
    TrainConfig {
        epochs,
        batches_per_epoch: batches,
        batch_size: 8,
        rep_dim: 12,
        model_selection: false,
        seed: 31,
        ..TrainConfig::default()
    }
}

#[test]
fn manual_replay_matches_trainer() {
    let prepared = prepare(
        generate_toy(&ToyConfig::new(800), 2).dataset,
        &ProtocolConfig::default(),
        2,
    )
    .unwrap();
    let cfg = config(3, 4);
    let (trained, history) = trainer::train(&prepared, &cfg).unwrap();

    let (anomalies, unlabeled) = prepared.training_pools();
    let arch = cfg.architecture(prepared.n_features()).unwrap();
    let mut scorer = Scorer::init(arch, cfg.slope, &mut stream(cfg.seed, Stream::Init)).unwrap();
    let mut batch_rng = stream(cfg.seed, Stream::Batching);
    let mut aug_rng = stream(cfg.seed, Stream::Augmentation);
    let mut adam = Adam::new(cfg.adam_config()).unwrap();
    let mut state = LossState::new(cfg.temperature).unwrap();

    for epoch in 0..cfg.epochs {
        let (mut ls, mut lps, mut ws) = (vec![], vec![], vec![]);
        for _ in 0..cfg.batches_per_epoch {
            let batch = sample_batches(
                anomalies.view(),
                unlabeled.view(),
                cfg.batch_size,
                &mut batch_rng,
            )
            .unwrap();
            let aug = augment_batch(
                &batch.sources(),
                cfg.k,
                cfg.alpha,
                2 * cfg.batch_size,
                &mut aug_rng,
            )
            .unwrap();
            let w = losses::dynamic_weight(
                losses::objective_value(
                    &scorer,
                    &batch,
                    &aug,
                    &cfg.loss_config(),
                    WeightPolicy::Fixed(1.0),
                )
                .unwrap()
                .scoring,
                losses::feature_regularizer(&scorer, &batch, cfg.margin).unwrap(),
                &state,
            );
            let (value, tape) = losses::objective(
                &scorer,
                &batch,
                &aug,
                &cfg.loss_config(),
                WeightPolicy::Fixed(w),
            )
            .unwrap();
            adam.step(&mut scorer.params, &tape).unwrap();
            ls.push(value.scoring);
            lps.push(value.regularizer.unwrap());
            ws.push(w);
        }
        let record = &history.epochs[epoch];
        assert_eq!(record.weights, ws, "epoch {epoch} weights");
        state.update_epoch_averages(&ls, &lps).unwrap();
        assert_eq!(record.mean_scoring, state.mean_scoring);
        assert_eq!(record.mean_regularizer, Some(state.mean_regularizer));
    }
    assert_eq!(trained, scorer);
    assert_eq!(history.selected_epoch, None);
}

#[test]
fn training_is_deterministic_and_seed_sensitive() {
    let prepared = prepare(
        generate_toy(&ToyConfig::new(800), 4).dataset,
        &ProtocolConfig::default(),
        4,
    )
    .unwrap();
    let (a, ha) = trainer::train(&prepared, &config(2, 3)).unwrap();
    let (b, hb) = trainer::train(&prepared, &config(2, 3)).unwrap();
    assert_eq!(a, b);
    assert_eq!(ha.epochs, hb.epochs);
    let (c, _) = trainer::train(
        &prepared,
        &TrainConfig {
            seed: 32,
            ..config(2, 3)
        },
    )
    .unwrap();
    assert_ne!(a, c);
}

#[test]
fn model_selection_returns_a_recorded_epoch() {
    let prepared = prepare(
        generate_toy(&ToyConfig::new(1500), 6).dataset,
        &ProtocolConfig::default(),
        6,
    )
    .unwrap();
    let cfg = TrainConfig {
        model_selection: true,
        ..config(4, 5)
    };
    let (_, history) = trainer::train(&prepared, &cfg).unwrap();
    let selected = history
        .selected_epoch
        .expect("validation split has anomalies");
    let best = history
        .epochs
        .iter()
        .filter_map(|e| e.valid_auc_pr)
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(history.epochs[selected - 1].valid_auc_pr, Some(best));
}
