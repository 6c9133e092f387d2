//! Checks the threshold sweep against an exhaustive recount at every grid
//! point, and the masked loss against off-mask perturbations.

use afford_core::{AffordanceTensor, CoverageMask, AFFORDANCE_COUNT};
use afford_evalkit::{
    default_grid, loss_masked, loss_masked_grad, threshold_sweep, SweepPair, ThresholdSet,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

struct Instance {
    predictions: Vec<AffordanceTensor>,
    truths: Vec<AffordanceTensor>,
    masks: Vec<CoverageMask>,
}

impl Instance {
    fn random(rng: &mut ChaCha8Rng) -> Instance {
        let pairs = rng.gen_range(1..=3);
        let (h, w) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let mut predictions = Vec::new();
        let mut truths = Vec::new();
        let mut masks = Vec::new();
        for _ in 0..pairs {
            // Mix arbitrary scores with grid-aligned ones so ties at exact
            // grid thresholds actually occur.
            predictions.push(
                AffordanceTensor::from_values(
                    h,
                    w,
                    (0..AFFORDANCE_COUNT * h * w)
                        .map(|_| {
                            if rng.gen_bool(0.5) {
                                rng.gen_range(0..=100) as f32 / 100.0
                            } else {
                                rng.gen()
                            }
                        })
                        .collect(),
                )
                .unwrap(),
            );
            truths.push(
                AffordanceTensor::from_values(
                    h,
                    w,
                    (0..AFFORDANCE_COUNT * h * w)
                        .map(|_| [0.0f32, 0.5, 1.0][rng.gen_range(0..3)])
                        .collect(),
                )
                .unwrap(),
            );
            masks.push(
                CoverageMask::from_values(h, w, (0..h * w).map(|_| rng.gen_range(0..=1u8)).collect())
                    .unwrap(),
            );
        }
        Instance {
            predictions,
            truths,
            masks,
        }
    }

    fn pairs(&self) -> Vec<SweepPair<'_>> {
        (0..self.predictions.len())
            .map(|i| SweepPair {
                prediction: &self.predictions[i],
                truth: &self.truths[i],
                mask: &self.masks[i],
            })
            .collect()
    }
}

/// Recomputes pooled IoU at a single threshold by walking every pixel.
fn pooled_iou_at(instance: &Instance, affordance: usize, tau: f32) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for i in 0..instance.predictions.len() {
        let pred = &instance.predictions[i];
        let truth = &instance.truths[i];
        let mask = &instance.masks[i];
        for y in 0..pred.height() {
            for x in 0..pred.width() {
                if !mask.is_valid(y, x) {
                    continue;
                }
                let t = truth.get(affordance, y, x) >= 0.5;
                let p = pred.get(affordance, y, x) >= tau;
                match (t, p) {
                    (true, true) => tp += 1,
                    (false, true) => fp += 1,
                    (true, false) => fn_ += 1,
                    (false, false) => {}
                }
            }
        }
    }
    if tp + fp + fn_ == 0 {
        1.0
    } else {
        tp as f64 / (tp + fp + fn_) as f64
    }
}

fn oracle_sweep(instance: &Instance, grid: &[f32]) -> [f32; AFFORDANCE_COUNT] {
    let mut sorted = grid.to_vec();
    sorted.sort_by(f32::total_cmp);
    let mut out = [0.0f32; AFFORDANCE_COUNT];
    for (a, slot) in out.iter_mut().enumerate() {
        let mut best_tau = sorted[0];
        let mut best = f64::NEG_INFINITY;
        for tau in &sorted {
            let iou = pooled_iou_at(instance, a, *tau);
            if iou >= best {
                best = iou;
                best_tau = *tau;
            }
        }
        *slot = best_tau;
    }
    out
}

#[test]
fn sweep_matches_exhaustive_recount() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let grid = default_grid();
    for round in 0..60 {
        let instance = Instance::random(&mut rng);
        let got = threshold_sweep(&instance.pairs(), &grid).unwrap();
        let want = oracle_sweep(&instance, &grid);
        for a in 0..AFFORDANCE_COUNT {
            assert_eq!(
                got.get(a),
                want[a],
                "round {round}, affordance {a}: sweep {} vs oracle {}",
                got.get(a),
                want[a]
            );
        }
    }
}

#[test]
fn sweep_matches_recount_on_a_coarse_unsorted_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let grid = [0.75f32, 0.0, 0.5, 0.25, 1.0];
    for _ in 0..40 {
        let instance = Instance::random(&mut rng);
        let got = threshold_sweep(&instance.pairs(), &grid).unwrap();
        let want = oracle_sweep(&instance, &grid);
        for a in 0..AFFORDANCE_COUNT {
            assert_eq!(got.get(a), want[a]);
        }
    }
}

#[test]
fn sweep_result_is_always_on_the_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let grid = [0.1f32, 0.4, 0.9];
    for _ in 0..20 {
        let instance = Instance::random(&mut rng);
        let got = threshold_sweep(&instance.pairs(), &grid).unwrap();
        for a in 0..AFFORDANCE_COUNT {
            assert!(grid.contains(&got.get(a)));
        }
    }
}

#[test]
fn off_mask_perturbations_change_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..200 {
        let (h, w) = (rng.gen_range(2..=6), rng.gen_range(2..=6));
        let targets = AffordanceTensor::from_values(
            h,
            w,
            (0..AFFORDANCE_COUNT * h * w)
                .map(|_| [0.0f32, 0.5, 1.0][rng.gen_range(0..3)])
                .collect(),
        )
        .unwrap();
        let predictions = AffordanceTensor::from_values(
            h,
            w,
            (0..AFFORDANCE_COUNT * h * w).map(|_| rng.gen()).collect(),
        )
        .unwrap();
        let mut mask_values: Vec<u8> = (0..h * w).map(|_| rng.gen_range(0..=1u8)).collect();
        // Keep at least one pixel invalid so there is something to perturb.
        mask_values[rng.gen_range(0..h * w)] = 0;
        let mask = CoverageMask::from_values(h, w, mask_values.clone()).unwrap();

        let base_loss = loss_masked(&targets, &predictions, &mask).unwrap();
        let base_grad = loss_masked_grad(&targets, &predictions, &mask).unwrap();

        // Rewrite every invalid pixel in both tensors with fresh noise.
        let mut targets2 = targets.clone();
        let mut predictions2 = predictions.clone();
        for y in 0..h {
            for x in 0..w {
                if mask_values[y * w + x] == 1 {
                    continue;
                }
                for a in 0..AFFORDANCE_COUNT {
                    targets2.set(a, y, x, [0.0f32, 0.5, 1.0][rng.gen_range(0..3)]);
                    predictions2.set(a, y, x, rng.gen());
                }
            }
        }
        let new_loss = loss_masked(&targets2, &predictions2, &mask).unwrap();
        let new_grad = loss_masked_grad(&targets2, &predictions2, &mask).unwrap();
        assert_eq!(base_loss.value.to_bits(), new_loss.value.to_bits());
        assert_eq!(base_loss.empty_mask, new_loss.empty_mask);
        for (a, b) in base_grad.grad.values.iter().zip(&new_grad.grad.values) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn constant_predictions_stress_the_tie_rule() {
    // Every threshold at or below the constant gives identical counts; at
    // 1.0 with constant 1.0 everything still fires. The tie rule must pick
    // the top of the grid segment with maximal IoU.
    let grid = default_grid();
    for constant in [0.0f32, 0.37, 1.0] {
        let truth = AffordanceTensor::from_values(
            2,
            2,
            (0..AFFORDANCE_COUNT * 4)
                .map(|i| if i % 2 == 0 { 1.0 } else { 0.0 })
                .collect(),
        )
        .unwrap();
        let pred =
            AffordanceTensor::from_values(2, 2, vec![constant; AFFORDANCE_COUNT * 4]).unwrap();
        let mask = CoverageMask::all_valid(2, 2);
        let pairs = [SweepPair {
            prediction: &pred,
            truth: &truth,
            mask: &mask,
        }];
        let got = threshold_sweep(&pairs, &grid).unwrap();
        let instance = Instance {
            predictions: vec![pred],
            truths: vec![truth],
            masks: vec![mask],
        };
        let want = oracle_sweep(&instance, &grid);
        for a in 0..AFFORDANCE_COUNT {
            assert_eq!(got.get(a), want[a]);
        }
    }
    let _ = ThresholdSet::uniform(0.5).unwrap();
}
