//! The training loop: seeded shuffling, mini-batch RMSprop on the
//! cross-entropy loss, per-epoch validation, and early stopping that
//! keeps the parameters of the best validation epoch.

use afford_core::AFFORDANCE_COUNT;
use afford_evalkit::loss::kernel;
use afford_mapgen::Sample;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::feature::FeatureMap;
use crate::model::{backward, forward_features, init_params, ModelConfig, ModelGrads, ModelParams};
use crate::optim::{Frozen, RmsProp, DEFAULT_EPSILON, DEFAULT_LEARNING_RATE, DEFAULT_RHO};
use crate::RefnetError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossMode {
    Masked,
    Unmasked,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs_max: usize,
    pub batch_size: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// When false the encoder is frozen: its gradients are still
    /// computed, the optimizer just skips them.
    pub encoder_train: bool,
    pub loss_mode: LossMode,
    pub seed: u64,
    pub learning_rate: f64,
    pub rho: f64,
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            epochs_max: 50,
            batch_size: 4,
            patience: 5,
            encoder_train: true,
            loss_mode: LossMode::Masked,
            seed: 0,
            learning_rate: DEFAULT_LEARNING_RATE,
            rho: DEFAULT_RHO,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), RefnetError> {
        if self.epochs_max < 1 {
            return Err(RefnetError::Argument("epochs_max must be at least 1".into()));
        }
        if self.batch_size < 1 {
            return Err(RefnetError::Argument("batch size must be at least 1".into()));
        }
        if self.patience < 1 {
            return Err(RefnetError::Argument("patience must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(RefnetError::Argument("learning rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(RefnetError::Argument("rho must be in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters of the best validation epoch.
    pub params: ModelParams,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Improved,
    Continue,
    Stop,
}

/// Strict-improvement early stopping: stop once `patience` epochs have
/// passed since the best validation loss.
#[derive(Debug, Clone)]
pub struct EarlyStopper {
    patience: usize,
    best: Option<(usize, f64)>,
}

impl EarlyStopper {
    pub fn new(patience: usize) -> EarlyStopper {
        EarlyStopper {
            patience,
            best: None,
        }
    }

    /// Feed one epoch's validation loss; epochs must arrive in order.
    pub fn observe(&mut self, epoch: usize, val_loss: f64) -> StopDecision {
        let improved = match self.best {
            None => true,
            Some((_, best_loss)) => val_loss < best_loss,
        };
        if improved {
            self.best = Some((epoch, val_loss));
            return StopDecision::Improved;
        }
        let (best_epoch, _) = self.best.expect("non-improvement implies a previous best");
        if epoch - best_epoch >= self.patience {
            StopDecision::Stop
        } else {
            StopDecision::Continue
        }
    }

    pub fn best_epoch(&self) -> Option<usize> {
        self.best.map(|(epoch, _)| epoch)
    }
}

/// A sample widened to the training representation once, up front.
struct Prepared {
    input: FeatureMap,
    target: Vec<f64>,
    mask: Vec<u8>,
}

fn prepare(samples: &[Sample]) -> Vec<Prepared> {
    samples
        .iter()
        .map(|s| Prepared {
            input: FeatureMap::from_raster(&s.image),
            target: s.target.values().iter().map(|v| *v as f64).collect(),
            mask: s.mask.values().to_vec(),
        })
        .collect()
}

fn sample_loss(mode: LossMode, sample: &Prepared, prediction: &FeatureMap) -> f64 {
    match mode {
        LossMode::Masked => {
            kernel::loss_masked(
                &sample.target,
                &prediction.values,
                &sample.mask,
                AFFORDANCE_COUNT,
            )
            .0
        }
        LossMode::Unmasked => {
            kernel::loss_unmasked(&sample.target, &prediction.values, AFFORDANCE_COUNT)
        }
    }
}

fn sample_loss_grad(mode: LossMode, sample: &Prepared, prediction: &FeatureMap) -> FeatureMap {
    let mut grad = FeatureMap::zeros(prediction.channels, prediction.height, prediction.width);
    match mode {
        LossMode::Masked => {
            kernel::loss_masked_grad(
                &sample.target,
                &prediction.values,
                &sample.mask,
                AFFORDANCE_COUNT,
                &mut grad.values,
            );
        }
        LossMode::Unmasked => {
            kernel::loss_unmasked_grad(
                &sample.target,
                &prediction.values,
                AFFORDANCE_COUNT,
                &mut grad.values,
            );
        }
    }
    grad
}

/// Trains from scratch and returns the best-validation-epoch parameters
/// plus the full per-epoch history.
pub fn train(
    config: &ModelConfig,
    train_data: &[Sample],
    val_data: &[Sample],
    tc: &TrainConfig,
) -> Result<TrainOutcome, RefnetError> {
    config.validate()?;
    tc.validate()?;
    if train_data.is_empty() || val_data.is_empty() {
        return Err(RefnetError::Argument(
            "training and validation sets must be nonempty".into(),
        ));
    }
    let (h, w) = (train_data[0].height(), train_data[0].width());
    for sample in train_data.iter().chain(val_data) {
        if sample.height() != h || sample.width() != w {
            return Err(RefnetError::Argument(format!(
                "sample {:?} is {}x{}, expected {h}x{w}",
                sample.source_id,
                sample.height(),
                sample.width()
            )));
        }
    }
    let stride = config.stride();
    if h % stride != 0 || w % stride != 0 {
        return Err(RefnetError::Argument(format!(
            "sample size {h}x{w} not divisible by 2^depth = {stride}"
        )));
    }

    let train_set = prepare(train_data);
    let val_set = prepare(val_data);

    let mut params = init_params(config)?;
    let mut optimizer =
        RmsProp::with_hyperparams(&params, tc.learning_rate, tc.rho, tc.epsilon);
    let frozen = if tc.encoder_train {
        Frozen::Nothing
    } else {
        Frozen::Encoder
    };
    let mut rng = ChaCha8Rng::seed_from_u64(tc.seed);
    let mut stopper = EarlyStopper::new(tc.patience);
    let mut history = Vec::new();
    let mut best: Option<(usize, ModelParams)> = None;

    for epoch in 1..=tc.epochs_max {
        let mut order: Vec<usize> = (0..train_set.len()).collect();
        order.shuffle(&mut rng);

        let mut train_loss_sum = 0.0f64;
        for chunk in order.chunks(tc.batch_size) {
            let mut batch_grads = ModelGrads::zeros_like(&params);
            for &index in chunk {
                let sample = &train_set[index];
                let cache = forward_features(&params, config, &sample.input)?;
                train_loss_sum += sample_loss(tc.loss_mode, sample, &cache.output);
                let grad_q = sample_loss_grad(tc.loss_mode, sample, &cache.output);
                let (grads, _) = backward(&params, config, &cache, &grad_q)?;
                batch_grads.accumulate(&grads);
            }
            batch_grads.scale(1.0 / chunk.len() as f64);
            optimizer.step(&mut params, &batch_grads, frozen);
        }
        let train_loss = train_loss_sum / train_set.len() as f64;

        let mut val_loss_sum = 0.0f64;
        for sample in &val_set {
            let cache = forward_features(&params, config, &sample.input)?;
            val_loss_sum += sample_loss(tc.loss_mode, sample, &cache.output);
        }
        let val_loss = val_loss_sum / val_set.len() as f64;

        history.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
        });
        match stopper.observe(epoch, val_loss) {
            StopDecision::Improved => best = Some((epoch, params.clone())),
            StopDecision::Continue => {}
            StopDecision::Stop => break,
        }
    }

    let (best_epoch, best_params) = best.expect("first epoch always improves on no baseline");
    Ok(TrainOutcome {
        params: best_params,
        history,
        best_epoch,
    })
}
