//! Binary cross entropy over dense multi-label maps, with and without a
//! validity mask, plus the analytic gradient used for training.
//!
//! Everything accumulates in f64 with a fixed order: channel-major outer
//! loop, row-major pixel inner loop. The masked and unmasked paths perform
//! the same additions in the same order (masking multiplies by exactly 1.0
//! on fully covered data), so on an all-ones mask they agree bit for bit.

use afford_core::{AffordanceTensor, CoverageMask, AFFORDANCE_COUNT};

use crate::{check_same_shape, EvalError};

/// Predictions are clamped into [ε, 1-ε] before taking logs.
pub const PROB_EPSILON: f64 = 1e-7;

/// Cross entropy between a target probability `p` and a predicted
/// probability `q`: `-p ln q - (1-p) ln(1-q)`.
#[inline]
pub fn bce(p: f64, q: f64) -> f64 {
    let q = q.clamp(PROB_EPSILON, 1.0 - PROB_EPSILON);
    -(p * q.ln() + (1.0 - p) * (1.0 - q).ln())
}

/// f64 slice kernels shared by the tensor wrappers and the training loop.
///
/// Layout contract: `targets` and `predictions` hold `channels` planes of
/// `mask.len()` pixels each, channel-major; `mask` holds 0/1 bytes.
pub mod kernel {
    use super::{bce, PROB_EPSILON};

    /// Mean cross entropy over every channel and pixel.
    pub fn loss_unmasked(targets: &[f64], predictions: &[f64], channels: usize) -> f64 {
        let pixels = targets.len() / channels;
        debug_assert_eq!(targets.len(), channels * pixels);
        debug_assert_eq!(predictions.len(), channels * pixels);
        let mut acc = 0.0f64;
        for a in 0..channels {
            let t = &targets[a * pixels..(a + 1) * pixels];
            let q = &predictions[a * pixels..(a + 1) * pixels];
            for i in 0..pixels {
                acc += bce(t[i], q[i]);
            }
        }
        acc / (channels * pixels) as f64
    }

    /// Cross entropy averaged over valid pixels only. Returns the loss and
    /// whether the mask was empty (loss 0 in that case).
    pub fn loss_masked(
        targets: &[f64],
        predictions: &[f64],
        mask: &[u8],
        channels: usize,
    ) -> (f64, bool) {
        let pixels = mask.len();
        debug_assert_eq!(targets.len(), channels * pixels);
        debug_assert_eq!(predictions.len(), channels * pixels);
        let mut acc = 0.0f64;
        for a in 0..channels {
            let t = &targets[a * pixels..(a + 1) * pixels];
            let q = &predictions[a * pixels..(a + 1) * pixels];
            for i in 0..pixels {
                acc += mask[i] as f64 * bce(t[i], q[i]);
            }
        }
        let mut valid = 0.0f64;
        for m in mask {
            valid += *m as f64;
        }
        if valid == 0.0 {
            (0.0, true)
        } else {
            (acc / (channels as f64 * valid), false)
        }
    }

    /// Analytic gradient of [`loss_masked`] with respect to the predictions:
    /// `M_i (q - p) / (q (1 - q)) / (channels * sum M)` with clamped `q`.
    /// Writes into `grad` (same layout as `predictions`) and returns whether
    /// the mask was empty (gradient all zero in that case).
    pub fn loss_masked_grad(
        targets: &[f64],
        predictions: &[f64],
        mask: &[u8],
        channels: usize,
        grad: &mut [f64],
    ) -> bool {
        let pixels = mask.len();
        debug_assert_eq!(targets.len(), channels * pixels);
        debug_assert_eq!(predictions.len(), channels * pixels);
        debug_assert_eq!(grad.len(), channels * pixels);
        let mut valid = 0.0f64;
        for m in mask {
            valid += *m as f64;
        }
        if valid == 0.0 {
            grad.fill(0.0);
            return true;
        }
        let scale = 1.0 / (channels as f64 * valid);
        for a in 0..channels {
            let t = &targets[a * pixels..(a + 1) * pixels];
            let q = &predictions[a * pixels..(a + 1) * pixels];
            let g = &mut grad[a * pixels..(a + 1) * pixels];
            for i in 0..pixels {
                // A literal zero, not 0.0 * expr: the latter leaks the
                // expression's sign as -0.0 and the off-mask gradient must
                // be bit-stable regardless of the values stored there.
                if mask[i] == 0 {
                    g[i] = 0.0;
                    continue;
                }
                let qc = q[i].clamp(PROB_EPSILON, 1.0 - PROB_EPSILON);
                g[i] = (qc - t[i]) / (qc * (1.0 - qc)) * scale;
            }
        }
        false
    }

    /// Gradient of [`loss_unmasked`] with respect to the predictions.
    pub fn loss_unmasked_grad(
        targets: &[f64],
        predictions: &[f64],
        channels: usize,
        grad: &mut [f64],
    ) {
        let pixels = targets.len() / channels;
        debug_assert_eq!(predictions.len(), channels * pixels);
        debug_assert_eq!(grad.len(), channels * pixels);
        let scale = 1.0 / (channels * pixels) as f64;
        for a in 0..channels {
            let t = &targets[a * pixels..(a + 1) * pixels];
            let q = &predictions[a * pixels..(a + 1) * pixels];
            let g = &mut grad[a * pixels..(a + 1) * pixels];
            for i in 0..pixels {
                let qc = q[i].clamp(PROB_EPSILON, 1.0 - PROB_EPSILON);
                g[i] = (qc - t[i]) / (qc * (1.0 - qc)) * scale;
            }
        }
    }
}

/// A masked loss value plus the advisory flag raised when the mask had no
/// valid pixel at all (the value is then 0 by definition, not by fit).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskedLoss {
    pub value: f64,
    pub empty_mask: bool,
}

/// Gradient values with the same shape as the prediction tensor. Gradients
/// are unbounded, so this is a plain f64 field rather than a tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub values: Vec<f64>,
}

impl GradientField {
    pub fn get(&self, a: usize, y: usize, x: usize) -> f64 {
        self.values[(a * self.height + y) * self.width + x]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskedGradient {
    pub grad: GradientField,
    pub empty_mask: bool,
}

fn widen(values: &[f32]) -> Vec<f64> {
    values.iter().map(|v| *v as f64).collect()
}

/// Mean cross entropy between a target tensor and a prediction tensor over
/// all channels and pixels.
pub fn loss_unmasked(
    targets: &AffordanceTensor,
    predictions: &AffordanceTensor,
) -> Result<f64, EvalError> {
    check_same_shape(
        "targets vs predictions",
        (targets.height(), targets.width()),
        (predictions.height(), predictions.width()),
    )?;
    if targets.pixels() == 0 {
        return Err(EvalError::argument("tensor has no pixels"));
    }
    Ok(kernel::loss_unmasked(
        &widen(targets.values()),
        &widen(predictions.values()),
        AFFORDANCE_COUNT,
    ))
}

/// Mean cross entropy over valid pixels only.
pub fn loss_masked(
    targets: &AffordanceTensor,
    predictions: &AffordanceTensor,
    mask: &CoverageMask,
) -> Result<MaskedLoss, EvalError> {
    check_same_shape(
        "targets vs predictions",
        (targets.height(), targets.width()),
        (predictions.height(), predictions.width()),
    )?;
    check_same_shape(
        "targets vs mask",
        (targets.height(), targets.width()),
        (mask.height(), mask.width()),
    )?;
    let (value, empty_mask) = kernel::loss_masked(
        &widen(targets.values()),
        &widen(predictions.values()),
        mask.values(),
        AFFORDANCE_COUNT,
    );
    Ok(MaskedLoss { value, empty_mask })
}

/// Analytic gradient of the masked loss with respect to the predictions.
pub fn loss_masked_grad(
    targets: &AffordanceTensor,
    predictions: &AffordanceTensor,
    mask: &CoverageMask,
) -> Result<MaskedGradient, EvalError> {
    check_same_shape(
        "targets vs predictions",
        (targets.height(), targets.width()),
        (predictions.height(), predictions.width()),
    )?;
    check_same_shape(
        "targets vs mask",
        (targets.height(), targets.width()),
        (mask.height(), mask.width()),
    )?;
    let mut values = vec![0.0f64; targets.values().len()];
    let empty_mask = kernel::loss_masked_grad(
        &widen(targets.values()),
        &widen(predictions.values()),
        mask.values(),
        AFFORDANCE_COUNT,
        &mut values,
    );
    Ok(MaskedGradient {
        grad: GradientField {
            channels: AFFORDANCE_COUNT,
            height: targets.height(),
            width: targets.width(),
            values,
        },
        empty_mask,
    })
}

/// Gradient of the unmasked loss with respect to the predictions.
pub fn loss_unmasked_grad(
    targets: &AffordanceTensor,
    predictions: &AffordanceTensor,
) -> Result<GradientField, EvalError> {
    check_same_shape(
        "targets vs predictions",
        (targets.height(), targets.width()),
        (predictions.height(), predictions.width()),
    )?;
    let mut values = vec![0.0f64; targets.values().len()];
    kernel::loss_unmasked_grad(
        &widen(targets.values()),
        &widen(predictions.values()),
        AFFORDANCE_COUNT,
        &mut values,
    );
    Ok(GradientField {
        channels: AFFORDANCE_COUNT,
        height: targets.height(),
        width: targets.width(),
        values,
    })
}
