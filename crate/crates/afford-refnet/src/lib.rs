//! A small encoder-decoder segmentation network with hand-written
//! backward passes, trained with RMSprop and early stopping on the
//! masked (or unmasked) cross-entropy loss. Everything runs in f64 on
//! the CPU; fidelity over speed.

mod checkpoint;
mod feature;
mod layers;
mod model;
mod optim;
mod train;

pub use checkpoint::{load_checkpoint, load_history, save_checkpoint, save_history};
pub use feature::FeatureMap;
pub use layers::ConvKernel;
pub use model::{
    backward, forward, forward_features, init_params, ForwardCache, ModelConfig, ModelGrads,
    ModelParams, DEFAULT_DEPTH, DEFAULT_K,
};
pub use optim::{Frozen, RmsProp, DEFAULT_EPSILON, DEFAULT_LEARNING_RATE, DEFAULT_RHO};
pub use train::{
    train, EarlyStopper, EpochRecord, LossMode, StopDecision, TrainConfig, TrainOutcome,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RefnetError {
    #[error(transparent)]
    Core(#[from] afford_core::CoreError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("bad checkpoint at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("{0}")]
    Argument(String),
}
