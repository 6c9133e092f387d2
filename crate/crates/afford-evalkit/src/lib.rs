//! Losses, metrics, and threshold calibration for dense multi-label
//! affordance predictions.

pub mod loss;
pub mod metrics;
pub mod threshold;

pub use loss::{
    bce, loss_masked, loss_masked_grad, loss_unmasked, loss_unmasked_grad, GradientField,
    MaskedGradient, MaskedLoss, PROB_EPSILON,
};
pub use metrics::{
    binarize, binarize_truth, metrics, AffordanceRow, MetricsAccumulator, MetricsMode,
    MetricsReport, ThresholdSet,
};
pub use threshold::{default_grid, threshold_sweep, SweepPair};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("argument error: {0}")]
    Argument(String),

    #[error(
        "shape mismatch: {context}: {left_h}x{left_w} vs {right_h}x{right_w}"
    )]
    ShapeMismatch {
        context: &'static str,
        left_h: usize,
        left_w: usize,
        right_h: usize,
        right_w: usize,
    },
}

impl EvalError {
    pub(crate) fn argument(message: impl Into<String>) -> Self {
        EvalError::Argument(message.into())
    }
}

pub(crate) fn check_same_shape(
    context: &'static str,
    left: (usize, usize),
    right: (usize, usize),
) -> Result<(), EvalError> {
    if left != right {
        return Err(EvalError::ShapeMismatch {
            context,
            left_h: left.0,
            left_w: left.1,
            right_h: right.0,
            right_w: right.1,
        });
    }
    Ok(())
}
