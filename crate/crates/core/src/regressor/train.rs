use super::model::Model;
use super::{loss_for_config, Adadelta, RegressorError, TrainConfig};
use crate::angle::{circular_distance_raw, Angle};
use crate::dataset::{preprocess_for_model, DifficultyLevel, RotatedSample};
use ndarray::Array3;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// One preprocessed training pair.
#[derive(Debug, Clone)]
pub struct Example {
    pub input: Array3<f32>,
    /// Regression target in degrees.
    pub target: f64,
    pub truth: Angle,
}

/// Preprocesses samples for a model with the given input size. Targets are
/// signed for the restricted levels and wrapped for the full circle.
pub fn prepare_examples(samples: &[RotatedSample], input_size: (u32, u32)) -> Vec<Example> {
    samples
        .iter()
        .map(|s| Example {
            input: preprocess_for_model(&s.image, input_size),
            target: match s.level {
                DifficultyLevel::Full360 => s.true_angle.degrees(),
                _ => s.signed_angle,
            },
            truth: s.true_angle,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean batch loss seen during the epoch.
    pub train_loss: f64,
    /// Circular MAE of wrapped predictions on the validation set.
    pub val_mae: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub history: Vec<EpochRecord>,
    /// Epoch whose weights the model holds after training; `None` when no
    /// epoch ran.
    pub best_epoch: Option<usize>,
}

const EVAL_BATCH: usize = 64;

/// Circular MAE of the model on `examples`.
pub(crate) fn validation_mae(model: &Model, examples: &[Example]) -> Result<f64, RegressorError> {
    let mut total = 0.0;
    for chunk in examples.chunks(EVAL_BATCH) {
        let inputs: Vec<Array3<f32>> = chunk.iter().map(|e| e.input.clone()).collect();
        for (e, raw) in chunk.iter().zip(model.forward(&inputs)?) {
            if !raw.is_finite() {
                return Ok(f64::NAN);
            }
            total += circular_distance_raw(e.truth.degrees(), raw).degrees();
        }
    }
    Ok(total / examples.len() as f64)
}

/// Trains in place and leaves the model holding the weights of the epoch
/// with the lowest validation MAE.
pub fn train(model: &mut Model, cfg: &TrainConfig, train: &[Example], val: &[Example]) -> Result<TrainOutcome, RegressorError> {
    train_with_log(model, cfg, train, val, |_| {})
}

/// As [`train`], calling `on_epoch` after every epoch.
pub fn train_with_log(
    model: &mut Model,
    cfg: &TrainConfig,
    train: &[Example],
    val: &[Example],
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome, RegressorError> {
    cfg.validate()?;
    if cfg.epochs > 0 && (train.is_empty() || val.is_empty()) {
        return Err(RegressorError::InvalidArgument(format!(
            "need training and validation examples, got {} and {}",
            train.len(),
            val.len()
        )));
    }
    let loss = loss_for_config(cfg);
    let mut opt = Adadelta::new(cfg.optimizer);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(usize, f64, Vec<Vec<f32>>)> = None;

    for epoch in 1..=cfg.epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(epoch as u64);
        order.shuffle(&mut rng);

        let mut sum = 0.0;
        let mut batches = 0usize;
        for idx in order.chunks(cfg.batch_size) {
            let inputs: Vec<Array3<f32>> = idx.iter().map(|&i| train[i].input.clone()).collect();
            let targets: Vec<f64> = idx.iter().map(|&i| train[i].target).collect();
            model.zero_grad();
            let l = model.accumulate_gradients(&inputs, &targets, &loss)?;
            if !l.is_finite() {
                return Err(RegressorError::TrainingDiverged { epoch, loss: l });
            }
            opt.step(model.trainable_slots());
            sum += l;
            batches += 1;
        }
        let train_loss = sum / batches as f64;
        let val_mae = validation_mae(model, val)?;
        if !val_mae.is_finite() {
            return Err(RegressorError::TrainingDiverged { epoch, loss: val_mae });
        }
        let rec = EpochRecord { epoch, train_loss, val_mae };
        on_epoch(&rec);
        history.push(rec);
        if best.as_ref().is_none_or(|(_, m, _)| val_mae < *m) {
            best = Some((epoch, val_mae, model.snapshot()));
        }
    }

    let best_epoch = best.map(|(epoch, _, weights)| {
        model.restore(&weights);
        epoch
    });
    Ok(TrainOutcome { history, best_epoch })
}
