//! Per-affordance threshold calibration by exhaustive grid search on
//! pooled IoU.

use afford_core::{AffordanceTensor, CoverageMask, AFFORDANCE_COUNT};

use crate::metrics::{ratio, ThresholdSet};
use crate::{check_same_shape, EvalError};

/// One calibration sample: soft predictions, soft or hard truth, and the
/// coverage mask selecting which pixels count.
#[derive(Debug, Clone, Copy)]
pub struct SweepPair<'a> {
    pub prediction: &'a AffordanceTensor,
    pub truth: &'a AffordanceTensor,
    pub mask: &'a CoverageMask,
}

/// The default calibration grid: 0.00, 0.01, ..., 1.00.
pub fn default_grid() -> Vec<f32> {
    (0..=100).map(|i| i as f32 / 100.0).collect()
}

/// Picks, independently per affordance, the grid threshold maximizing IoU
/// pooled over all pairs. Ties go to the larger threshold. Truth is
/// binarized at 0.5 (partial presence counts as present).
pub fn threshold_sweep(pairs: &[SweepPair], grid: &[f32]) -> Result<ThresholdSet, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::argument("threshold sweep needs at least one pair"));
    }
    if grid.is_empty() {
        return Err(EvalError::argument("threshold grid is empty"));
    }
    for tau in grid {
        if !tau.is_finite() || !(0.0..=1.0).contains(tau) {
            return Err(EvalError::argument(format!(
                "grid threshold {tau} is outside [0, 1]"
            )));
        }
    }
    for pair in pairs {
        check_same_shape(
            "prediction vs truth",
            (pair.prediction.height(), pair.prediction.width()),
            (pair.truth.height(), pair.truth.width()),
        )?;
        check_same_shape(
            "prediction vs mask",
            (pair.prediction.height(), pair.prediction.width()),
            (pair.mask.height(), pair.mask.width()),
        )?;
    }

    let mut thresholds = [0.0f32; AFFORDANCE_COUNT];
    for a in 0..AFFORDANCE_COUNT {
        // Pool valid-pixel predictions by ground truth class, then counting
        // tp/fp at a threshold is two binary searches in the sorted arrays.
        let mut positives = Vec::new();
        let mut negatives = Vec::new();
        for pair in pairs {
            let pred = pair.prediction.channel(a);
            let truth = pair.truth.channel(a);
            let mask = pair.mask.values();
            for i in 0..pred.len() {
                if mask[i] == 0 {
                    continue;
                }
                if truth[i] >= 0.5 {
                    positives.push(pred[i]);
                } else {
                    negatives.push(pred[i]);
                }
            }
        }
        positives.sort_by(f32::total_cmp);
        negatives.sort_by(f32::total_cmp);
        let total_pos = positives.len() as u64;

        let mut best_tau = grid[0];
        let mut best_iou = f64::NEG_INFINITY;
        let mut sorted_grid = grid.to_vec();
        sorted_grid.sort_by(f32::total_cmp);
        for tau in sorted_grid {
            let tp = (positives.len() - positives.partition_point(|v| *v < tau)) as u64;
            let fp = (negatives.len() - negatives.partition_point(|v| *v < tau)) as u64;
            let fn_ = total_pos - tp;
            let iou = ratio(tp, tp + fp + fn_);
            // `>=` on an ascending grid prefers the larger threshold on ties.
            if iou >= best_iou {
                best_iou = iou;
                best_tau = tau;
            }
        }
        thresholds[a] = best_tau;
    }
    ThresholdSet::new(thresholds)
}
