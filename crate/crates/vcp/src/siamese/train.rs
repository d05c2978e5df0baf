//! Minibatch MAE training with Adam and early stopping.
//!
//! Targets are scaled by `target_scale` during optimization so the head
//! works in O(1) units; every reported MAE is converted back to word units.
//! After each epoch the validation MAE is observed; when it has not improved
//! for `patience` consecutive epochs training stops and the weights from the
//! best epoch are restored.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::nn::{adam_step, AdamConfig, AdamState};
use crate::pairs::DatasetExample;

use super::{SiameseError, SiameseModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub patience: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
    /// Divisor applied to distance targets during optimization.
    pub target_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_epochs: 100,
            patience: 5,
            batch_size: 64,
            lr: 1e-3,
            seed: 0,
            target_scale: 1000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_mae: f64,
    pub val_mae: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
    /// Last epoch that ran (1-based).
    pub stopped_epoch: usize,
    /// Epoch whose weights the returned model carries.
    pub best_epoch: usize,
}

/// Patience counter over per-epoch validation MAE.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best_mae: f64,
    best_epoch: usize,
    since_improve: usize,
    seen_any: bool,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        assert!(patience >= 1, "patience must be at least 1");
        EarlyStopping {
            patience,
            best_mae: f64::INFINITY,
            best_epoch: 0,
            since_improve: 0,
            seen_any: false,
        }
    }

    /// Record one epoch's validation MAE; returns true when it is a strict
    /// improvement over the best seen so far.
    pub fn observe(&mut self, epoch: usize, val_mae: f64) -> bool {
        if !self.seen_any || val_mae < self.best_mae {
            self.seen_any = true;
            self.best_mae = val_mae;
            self.best_epoch = epoch;
            self.since_improve = 0;
            true
        } else {
            self.since_improve += 1;
            false
        }
    }

    pub fn should_stop(&self) -> bool {
        self.since_improve >= self.patience
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn best_mae(&self) -> f64 {
        self.best_mae
    }
}

/// Train against a validation set of held-out examples.
pub fn train(
    model: SiameseModel,
    train_set: &[DatasetExample],
    val_set: &[DatasetExample],
    cfg: &TrainConfig,
) -> Result<(SiameseModel, TrainHistory), SiameseError> {
    if val_set.is_empty() {
        return Err(SiameseError::EmptySet("validation"));
    }
    train_with_validator(model, train_set, cfg, |m, _epoch| {
        let mut total = 0.0;
        for ex in val_set {
            total += (m.forward(&ex.text_a_ids, &ex.text_b_ids)? - ex.distance as f64).abs();
        }
        Ok(total / val_set.len() as f64)
    })
}

/// Training loop with a pluggable per-epoch validation measurement.
///
/// The validator receives the model as of the end of each epoch and returns
/// the validation MAE in word units; early stopping and best-weight
/// restoration react to whatever it reports.
pub fn train_with_validator<F>(
    mut model: SiameseModel,
    train_set: &[DatasetExample],
    cfg: &TrainConfig,
    mut validate: F,
) -> Result<(SiameseModel, TrainHistory), SiameseError>
where
    F: FnMut(&SiameseModel, usize) -> Result<f64, SiameseError>,
{
    if train_set.is_empty() {
        return Err(SiameseError::EmptySet("train"));
    }
    for ex in train_set {
        if ex.text_a_ids.len() != model.seq_len || ex.text_b_ids.len() != model.seq_len {
            return Err(SiameseError::BadSequenceLength {
                expected: model.seq_len,
                got: ex.text_a_ids.len().max(ex.text_b_ids.len()),
            });
        }
    }
    model.output_scale = cfg.target_scale;
    let scale = cfg.target_scale;

    let mut theta = model.trainable_to_vec();
    let mut best_theta = theta.clone();
    let mut adam = AdamState::new(theta.len());
    let adam_cfg = AdamConfig {
        lr: cfg.lr,
        ..AdamConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut history = Vec::new();
    let mut stopped_epoch = 0;
    let mut indices: Vec<usize> = (0..train_set.len()).collect();

    for epoch in 1..=cfg.max_epochs {
        indices.shuffle(&mut rng);
        let mut abs_err_sum = 0.0;
        for batch in indices.chunks(cfg.batch_size) {
            let weight = 1.0 / batch.len() as f64;
            let mut grads = vec![0.0; theta.len()];
            for &idx in batch {
                let ex = &train_set[idx];
                let target_scaled = ex.distance as f64 / scale;
                let (abs_err, g) = model.forward_backward(
                    &ex.text_a_ids,
                    &ex.text_b_ids,
                    target_scaled,
                    weight,
                )?;
                abs_err_sum += abs_err;
                for (acc, gi) in grads.iter_mut().zip(g) {
                    *acc += gi;
                }
            }
            adam_step(&mut theta, &grads, &mut adam, &adam_cfg)?;
            model.set_trainable_from(&theta);
        }
        let train_mae = abs_err_sum / train_set.len() as f64 * scale;
        if !train_mae.is_finite() {
            return Err(SiameseError::NonFiniteLoss {
                epoch,
                value: train_mae,
            });
        }
        let val_mae = validate(&model, epoch)?;
        if !val_mae.is_finite() {
            return Err(SiameseError::NonFiniteLoss {
                epoch,
                value: val_mae,
            });
        }
        history.push(EpochStats {
            epoch,
            train_mae,
            val_mae,
        });
        if stopper.observe(epoch, val_mae) {
            best_theta.copy_from_slice(&theta);
        }
        stopped_epoch = epoch;
        if stopper.should_stop() {
            break;
        }
    }

    model.set_trainable_from(&best_theta);
    Ok((
        model,
        TrainHistory {
            epochs: history,
            stopped_epoch,
            best_epoch: stopper.best_epoch(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::EmbeddingMatrix;
    use rand::Rng;

    fn tiny_model(seed: u64) -> SiameseModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = 2;
        let vocab = 9;
        let mut data = vec![0.0; (vocab + 1) * dim];
        for cell in data.iter_mut().skip(dim) {
            *cell = rng.random_range(-1.0..1.0);
        }
        let emb = EmbeddingMatrix::from_raw(vocab + 1, dim, data);
        SiameseModel::new(emb, 4, 3, seed)
    }

    fn examples(seed: u64, n: usize) -> Vec<DatasetExample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let seq = |rng: &mut ChaCha8Rng| (0..4).map(|_| rng.random_range(0..10)).collect();
                DatasetExample {
                    text_a_ids: seq(&mut rng),
                    text_b_ids: seq(&mut rng),
                    distance: rng.random_range(1..=1000),
                }
            })
            .collect()
    }

    #[test]
    fn improving_validation_runs_all_epochs() {
        let model = tiny_model(1);
        let train_set = examples(2, 8);
        let cfg = TrainConfig {
            max_epochs: 10,
            patience: 2,
            batch_size: 4,
            ..TrainConfig::default()
        };
        let mut fake_mae = 100.0;
        let (_, history) = train_with_validator(model, &train_set, &cfg, |_, _| {
            fake_mae -= 1.0;
            Ok(fake_mae)
        })
        .unwrap();
        assert_eq!(history.stopped_epoch, 10);
        assert_eq!(history.best_epoch, 10);
        assert_eq!(history.epochs.len(), 10);
    }

    #[test]
    fn patience_stops_after_k_plus_patience() {
        let model = tiny_model(3);
        let train_set = examples(4, 8);
        let cfg = TrainConfig {
            max_epochs: 100,
            patience: 5,
            batch_size: 4,
            ..TrainConfig::default()
        };
        // Best at epoch 3, strictly worse afterwards.
        let schedule = |epoch: usize| if epoch <= 3 { 50.0 - epoch as f64 } else { 60.0 };
        let (_, history) =
            train_with_validator(model, &train_set, &cfg, |_, epoch| Ok(schedule(epoch))).unwrap();
        assert_eq!(history.best_epoch, 3);
        assert_eq!(history.stopped_epoch, 3 + 5);
    }

    #[test]
    fn best_weights_are_restored() {
        let model = tiny_model(5);
        let train_set = examples(6, 12);
        let cfg = TrainConfig {
            max_epochs: 20,
            patience: 3,
            batch_size: 4,
            ..TrainConfig::default()
        };
        let best_epoch = 2;
        let snapshots: std::cell::RefCell<Vec<Vec<f64>>> = std::cell::RefCell::new(Vec::new());
        let (trained, history) = train_with_validator(model, &train_set, &cfg, |m, epoch| {
            snapshots.borrow_mut().push(m.trainable_to_vec());
            Ok(if epoch == best_epoch { 1.0 } else { 10.0 + epoch as f64 })
        })
        .unwrap();
        assert_eq!(history.best_epoch, best_epoch);
        assert_eq!(history.stopped_epoch, best_epoch + cfg.patience);
        let expected = &snapshots.borrow()[best_epoch - 1];
        assert_eq!(&trained.trainable_to_vec(), expected);
    }

    #[test]
    fn empty_sets_rejected() {
        let model = tiny_model(7);
        let cfg = TrainConfig::default();
        let some = examples(8, 4);
        assert!(matches!(
            train(model.clone(), &[], &some, &cfg),
            Err(SiameseError::EmptySet("train"))
        ));
        assert!(matches!(
            train(model, &some, &[], &cfg),
            Err(SiameseError::EmptySet("validation"))
        ));
    }

    #[test]
    fn single_example_loss_decreases_at_small_lr() {
        for seed in [11u64, 12, 13] {
            let model = tiny_model(seed);
            let ex = &examples(seed + 100, 1)[0];
            let cfg = TrainConfig {
                max_epochs: 1,
                batch_size: 1,
                lr: 1e-4,
                seed,
                ..TrainConfig::default()
            };
            let before_model = {
                let mut m = model.clone();
                m.output_scale = cfg.target_scale;
                m
            };
            let before = (before_model.forward(&ex.text_a_ids, &ex.text_b_ids).unwrap()
                - ex.distance as f64)
                .abs();
            let train_set = vec![ex.clone()];
            let (after_model, _) =
                train_with_validator(model, &train_set, &cfg, |_, _| Ok(1.0)).unwrap();
            let after = (after_model.forward(&ex.text_a_ids, &ex.text_b_ids).unwrap()
                - ex.distance as f64)
                .abs();
            assert!(after < before, "seed {seed}: {after} !< {before}");
        }
    }

    #[test]
    fn fixed_seed_reproduces_history_bit_exactly() {
        let cfg = TrainConfig {
            max_epochs: 4,
            batch_size: 4,
            seed: 42,
            ..TrainConfig::default()
        };
        let train_set = examples(9, 10);
        let val_set = examples(10, 4);
        let (m1, h1) = train(tiny_model(20), &train_set, &val_set, &cfg).unwrap();
        let (m2, h2) = train(tiny_model(20), &train_set, &val_set, &cfg).unwrap();
        assert_eq!(h1, h2);
        assert_eq!(m1.trainable_to_vec(), m2.trainable_to_vec());
    }
}
