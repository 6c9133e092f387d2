//! Binarization and segmentation metrics over valid pixels.
//!
//! Two reporting modes share the same counts and the same IoU. `Standard`
//! normalizes accuracies the conventional way (bounded by 1). `Paper`
//! reproduces the historical formulas whose accuracy denominators count
//! ground-truth positives, so those values can exceed 1; they are kept for
//! comparability with previously published numbers.

use afford_core::{AffordanceTensor, CoverageMask, AFFORDANCE_COUNT, AFFORDANCE_NAMES};
use serde::{Deserialize, Serialize};

use crate::{check_same_shape, EvalError};

/// Per-affordance decision thresholds, serialized as a JSON array of 15
/// numbers in vocabulary order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f32>", into = "Vec<f32>")]
pub struct ThresholdSet([f32; AFFORDANCE_COUNT]);

impl ThresholdSet {
    pub fn new(values: [f32; AFFORDANCE_COUNT]) -> Result<ThresholdSet, EvalError> {
        for v in values {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(EvalError::argument(format!(
                    "threshold {v} is outside [0, 1]"
                )));
            }
        }
        Ok(ThresholdSet(values))
    }

    pub fn uniform(value: f32) -> Result<ThresholdSet, EvalError> {
        ThresholdSet::new([value; AFFORDANCE_COUNT])
    }

    pub fn get(&self, affordance: usize) -> f32 {
        self.0[affordance]
    }

    pub fn values(&self) -> &[f32; AFFORDANCE_COUNT] {
        &self.0
    }
}

impl TryFrom<Vec<f32>> for ThresholdSet {
    type Error = EvalError;

    fn try_from(values: Vec<f32>) -> Result<ThresholdSet, EvalError> {
        let array: [f32; AFFORDANCE_COUNT] = values.try_into().map_err(|v: Vec<f32>| {
            EvalError::argument(format!(
                "threshold set has {} values, expected {AFFORDANCE_COUNT}",
                v.len()
            ))
        })?;
        ThresholdSet::new(array)
    }
}

impl From<ThresholdSet> for Vec<f32> {
    fn from(set: ThresholdSet) -> Vec<f32> {
        set.0.to_vec()
    }
}

/// Per-channel thresholding: output is 1 where the prediction is at or
/// above the channel's threshold, 0 below.
pub fn binarize(predictions: &AffordanceTensor, thresholds: &ThresholdSet) -> AffordanceTensor {
    let mut out = AffordanceTensor::zeros(predictions.height(), predictions.width());
    let pixels = predictions.pixels();
    for a in 0..AFFORDANCE_COUNT {
        let tau = thresholds.get(a);
        let src = predictions.channel(a);
        let dst = &mut out.values_mut()[a * pixels..(a + 1) * pixels];
        for (d, s) in dst.iter_mut().zip(src) {
            *d = if *s >= tau { 1.0 } else { 0.0 };
        }
    }
    out
}

/// Ground truth binarization: partial presence (0.5) counts as present.
pub fn binarize_truth(targets: &AffordanceTensor) -> AffordanceTensor {
    binarize(targets, &ThresholdSet::uniform(0.5).unwrap())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricsMode {
    Paper,
    Standard,
}

/// One row of the per-affordance table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffordanceRow {
    pub affordance: String,
    pub iou: f64,
    pub accuracy: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mode: MetricsMode,
    pub valid_pixels: u64,
    pub pixel_accuracy: f64,
    pub mean_accuracy: f64,
    pub mean_iou: f64,
    pub per_affordance: Vec<AffordanceRow>,
}

impl MetricsReport {
    pub fn iou(&self, affordance: usize) -> f64 {
        self.per_affordance[affordance].iou
    }
}

/// Degenerate-denominator rule used by every metric here: an empty
/// denominator scores 1 when the numerator is also empty (nothing to get
/// wrong) and 0 otherwise.
pub(crate) fn ratio(numerator: u64, denominator: u64) -> f64 {
    if denominator == 0 {
        if numerator == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        numerator as f64 / denominator as f64
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    tp: u64,
    fp: u64,
    fn_: u64,
    tn: u64,
}

/// Pools confusion counts over any number of (truth, prediction, mask)
/// triples, then renders a report in either mode.
#[derive(Debug, Clone)]
pub struct MetricsAccumulator {
    counts: [Counts; AFFORDANCE_COUNT],
    valid_pixels: u64,
}

impl Default for MetricsAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

fn check_binary(name: &'static str, tensor: &AffordanceTensor) -> Result<(), EvalError> {
    for v in tensor.values() {
        if *v != 0.0 && *v != 1.0 {
            return Err(EvalError::argument(format!(
                "{name} tensor is not binary: found value {v}"
            )));
        }
    }
    Ok(())
}

impl MetricsAccumulator {
    pub fn new() -> MetricsAccumulator {
        MetricsAccumulator {
            counts: [Counts::default(); AFFORDANCE_COUNT],
            valid_pixels: 0,
        }
    }

    /// Adds one binary truth/prediction pair, counting valid pixels only.
    pub fn add(
        &mut self,
        truth: &AffordanceTensor,
        predictions: &AffordanceTensor,
        mask: &CoverageMask,
    ) -> Result<(), EvalError> {
        check_same_shape(
            "truth vs predictions",
            (truth.height(), truth.width()),
            (predictions.height(), predictions.width()),
        )?;
        check_same_shape(
            "truth vs mask",
            (truth.height(), truth.width()),
            (mask.height(), mask.width()),
        )?;
        check_binary("truth", truth)?;
        check_binary("prediction", predictions)?;
        let pixels = truth.pixels();
        let mask_values = mask.values();
        for a in 0..AFFORDANCE_COUNT {
            let t = truth.channel(a);
            let p = predictions.channel(a);
            let c = &mut self.counts[a];
            for i in 0..pixels {
                if mask_values[i] == 0 {
                    continue;
                }
                match (t[i] == 1.0, p[i] == 1.0) {
                    (true, true) => c.tp += 1,
                    (false, true) => c.fp += 1,
                    (true, false) => c.fn_ += 1,
                    (false, false) => c.tn += 1,
                }
            }
        }
        self.valid_pixels += mask.count_valid() as u64;
        Ok(())
    }

    pub fn finish(&self, mode: MetricsMode) -> MetricsReport {
        let mut rows = Vec::with_capacity(AFFORDANCE_COUNT);
        let mut iou_sum = 0.0;
        let mut accuracy_sum = 0.0;
        let mut correct_total = 0u64;
        let mut positive_total = 0u64;
        for (a, c) in self.counts.iter().enumerate() {
            let iou = ratio(c.tp, c.tp + c.fp + c.fn_);
            let accuracy = match mode {
                // Per-class recall.
                MetricsMode::Standard => ratio(c.tp, c.tp + c.fn_),
                // Correct decisions over ground-truth positives; can
                // exceed 1.
                MetricsMode::Paper => ratio(c.tp + c.tn, c.tp + c.fn_),
            };
            iou_sum += iou;
            accuracy_sum += accuracy;
            correct_total += c.tp + c.tn;
            positive_total += c.tp + c.fn_;
            rows.push(AffordanceRow {
                affordance: AFFORDANCE_NAMES[a].to_string(),
                iou,
                accuracy,
                tp: c.tp,
                fp: c.fp,
                fn_: c.fn_,
                tn: c.tn,
            });
        }
        let pixel_accuracy = match mode {
            MetricsMode::Standard => ratio(
                correct_total,
                AFFORDANCE_COUNT as u64 * self.valid_pixels,
            ),
            MetricsMode::Paper => ratio(correct_total, positive_total),
        };
        MetricsReport {
            mode,
            valid_pixels: self.valid_pixels,
            pixel_accuracy,
            mean_accuracy: accuracy_sum / AFFORDANCE_COUNT as f64,
            mean_iou: iou_sum / AFFORDANCE_COUNT as f64,
            per_affordance: rows,
        }
    }
}

/// Metrics for a single binary truth/prediction pair.
pub fn metrics(
    truth: &AffordanceTensor,
    predictions: &AffordanceTensor,
    mask: &CoverageMask,
    mode: MetricsMode,
) -> Result<MetricsReport, EvalError> {
    let mut acc = MetricsAccumulator::new();
    acc.add(truth, predictions, mask)?;
    Ok(acc.finish(mode))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tensor_with(channel: usize, pattern: &[f32], width: usize) -> AffordanceTensor {
        let height = pattern.len() / width;
        let mut t = AffordanceTensor::zeros(height, width);
        for (i, v) in pattern.iter().enumerate() {
            t.set(channel, i / width, i % width, *v);
        }
        t
    }

    #[test]
    fn binarize_uses_at_or_above() {
        let mut pred = AffordanceTensor::zeros(1, 4);
        for (i, v) in [0.2f32, 0.5, 0.8, 1.0].iter().enumerate() {
            pred.set(0, 0, i, *v);
        }
        let out = binarize(&pred, &ThresholdSet::uniform(0.5).unwrap());
        assert_eq!(out.channel(0), &[0.0, 1.0, 1.0, 1.0]);
        // Threshold 1.0 still fires on a prediction of exactly 1.0.
        let out = binarize(&pred, &ThresholdSet::uniform(1.0).unwrap());
        assert_eq!(out.channel(0), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn truth_binarization_counts_partial_as_present() {
        let t = tensor_with(3, &[0.0, 0.5, 1.0, 0.0], 2);
        let b = binarize_truth(&t);
        assert_eq!(b.channel(3), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn perfect_prediction_scores_one_everywhere() {
        let truth = tensor_with(0, &[1.0, 0.0, 1.0, 0.0], 2);
        let mask = CoverageMask::all_valid(2, 2);
        let report = metrics(&truth, &truth, &mask, MetricsMode::Standard).unwrap();
        assert_eq!(report.mean_iou, 1.0);
        assert_eq!(report.pixel_accuracy, 1.0);
        assert_eq!(report.mean_accuracy, 1.0);
        // Channels with no positives anywhere have an empty union and score
        // IoU 1 by the degenerate-denominator rule.
        assert!(report.per_affordance.iter().all(|r| r.iou == 1.0));
    }

    #[test]
    fn iou_counts_match_hand_example() {
        // Channel 0: truth 1 1 0 0, prediction 1 0 1 0.
        let truth = tensor_with(0, &[1.0, 1.0, 0.0, 0.0], 2);
        let pred = tensor_with(0, &[1.0, 0.0, 1.0, 0.0], 2);
        let mask = CoverageMask::all_valid(2, 2);
        let report = metrics(&truth, &pred, &mask, MetricsMode::Standard).unwrap();
        let row = &report.per_affordance[0];
        assert_eq!((row.tp, row.fp, row.fn_, row.tn), (1, 1, 1, 1));
        assert!((row.iou - 1.0 / 3.0).abs() < 1e-12);
        assert!((row.accuracy - 0.5).abs() < 1e-12);
    }

    #[test]
    fn invalid_pixels_never_count() {
        let truth = tensor_with(0, &[1.0, 1.0, 0.0, 0.0], 2);
        let pred = tensor_with(0, &[1.0, 0.0, 1.0, 0.0], 2);
        let mask = CoverageMask::from_values(2, 2, vec![1, 0, 0, 1]).unwrap();
        let report = metrics(&truth, &pred, &mask, MetricsMode::Standard).unwrap();
        let row = &report.per_affordance[0];
        assert_eq!((row.tp, row.fp, row.fn_, row.tn), (1, 0, 0, 1));
        assert_eq!(report.valid_pixels, 2);
    }

    #[test]
    fn paper_mode_accuracy_can_exceed_one() {
        // Many correct negatives, one positive: correct / positives > 1.
        let truth = tensor_with(0, &[1.0, 0.0, 0.0, 0.0], 2);
        let pred = truth.clone();
        let mask = CoverageMask::all_valid(2, 2);
        let paper = metrics(&truth, &pred, &mask, MetricsMode::Paper).unwrap();
        assert!(paper.per_affordance[0].accuracy > 1.0);
        assert!(paper.pixel_accuracy >= 0.0);
        let standard = metrics(&truth, &pred, &mask, MetricsMode::Standard).unwrap();
        assert!(standard.pixel_accuracy <= 1.0);
        assert!(standard.mean_accuracy <= 1.0);
        // IoU is mode-independent.
        assert_eq!(paper.mean_iou, standard.mean_iou);
    }

    #[test]
    fn non_binary_input_is_rejected() {
        let soft = tensor_with(0, &[0.4, 0.0, 0.0, 0.0], 2);
        let bin = tensor_with(0, &[1.0, 0.0, 0.0, 0.0], 2);
        let mask = CoverageMask::all_valid(2, 2);
        assert!(metrics(&soft, &bin, &mask, MetricsMode::Standard).is_err());
        assert!(metrics(&bin, &soft, &mask, MetricsMode::Standard).is_err());
    }

    #[test]
    fn threshold_set_serializes_as_plain_array() {
        let set = ThresholdSet::uniform(0.25).unwrap();
        let json = serde_json::to_string(&set).unwrap();
        assert_eq!(json, format!("[{}]", vec!["0.25"; 15].join(",")));
        let back: ThresholdSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, set);
        assert!(serde_json::from_str::<ThresholdSet>("[0.5,0.5]").is_err());
    }
}
