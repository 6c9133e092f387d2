//! Crop and photometric augmentation, and dataset mixing.
//!
//! Augmentation only ever touches the RGB image. Targets and masks are
//! cropped with the same window and copied bit-unchanged: label geometry
//! must stay locked to the pixels it describes.

use afford_core::{AffordanceTensor, CoverageMask, RgbRaster, AFFORDANCE_COUNT};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{MapgenError, Sample};

/// Smallest crop side the augmenter will produce.
pub const MIN_CROP_SIDE: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentSpec {
    /// Number of crops generated from each input sample.
    pub crops_per_image: usize,
    /// Square crop side as a fraction of the shorter image side, drawn
    /// uniformly per crop.
    pub crop_fraction_range: [f32; 2],
    /// Per-channel brightness gain, drawn independently for R, G, B.
    pub gain_range: [f32; 2],
    /// Contrast factor about the crop's own mean intensity.
    pub contrast_range: [f32; 2],
    pub seed: u64,
}

impl Default for AugmentSpec {
    fn default() -> AugmentSpec {
        AugmentSpec {
            crops_per_image: 4,
            crop_fraction_range: [0.6, 1.0],
            gain_range: [0.8, 1.2],
            contrast_range: [0.8, 1.2],
            seed: 0,
        }
    }
}

impl AugmentSpec {
    pub fn validate(&self) -> Result<(), MapgenError> {
        if self.crops_per_image == 0 {
            return Err(MapgenError::argument("crops_per_image must be at least 1"));
        }
        let ranges = [
            ("crop_fraction_range", self.crop_fraction_range),
            ("gain_range", self.gain_range),
            ("contrast_range", self.contrast_range),
        ];
        for (name, [lo, hi]) in ranges {
            if !lo.is_finite() || !hi.is_finite() || lo > hi || lo < 0.0 {
                return Err(MapgenError::argument(format!(
                    "{name} [{lo}, {hi}] is not an ordered nonnegative range"
                )));
            }
        }
        let [lo, hi] = self.crop_fraction_range;
        if lo <= 0.0 || hi > 1.0 {
            return Err(MapgenError::argument(format!(
                "crop_fraction_range [{lo}, {hi}] must sit inside (0, 1]"
            )));
        }
        Ok(())
    }
}

/// Generates `crops_per_image` jittered square crops from every sample.
///
/// Per crop the generator draws, in this order: crop fraction, x offset,
/// y offset, R gain, G gain, B gain, contrast. Each image pixel becomes
/// `clamp(m + c * (g_ch * v - m))` where `m` is the mean intensity of the
/// original (un-jittered) crop across all three channels; it is evaluated
/// as `c*g*v + (1-c)*m` so that gain 1 / contrast 1 reproduces the source
/// pixels bit for bit.
pub fn crop_augment(samples: &[Sample], spec: &AugmentSpec) -> Result<Vec<Sample>, MapgenError> {
    spec.validate()?;
    // Reject up front rather than producing a dataset with illegal sizes:
    // rounding is monotone, so the low fraction bounds every draw.
    for sample in samples {
        let min_dim = sample.height().min(sample.width());
        let smallest = (spec.crop_fraction_range[0] * min_dim as f32).round() as usize;
        if smallest < MIN_CROP_SIDE {
            return Err(MapgenError::argument(format!(
                "crop fraction {} of a {}x{} image can give a {}-pixel side; the minimum is {}",
                spec.crop_fraction_range[0],
                sample.height(),
                sample.width(),
                smallest,
                MIN_CROP_SIDE
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(samples.len() * spec.crops_per_image);
    for sample in samples {
        let (h, w) = (sample.height(), sample.width());
        let min_dim = h.min(w);
        for k in 0..spec.crops_per_image {
            let [flo, fhi] = spec.crop_fraction_range;
            let fraction = rng.gen_range(flo..=fhi);
            let side = (fraction * min_dim as f32).round() as usize;
            let x0 = rng.gen_range(0..=w - side);
            let y0 = rng.gen_range(0..=h - side);
            let [glo, ghi] = spec.gain_range;
            let gains = [
                rng.gen_range(glo..=ghi),
                rng.gen_range(glo..=ghi),
                rng.gen_range(glo..=ghi),
            ];
            let [clo, chi] = spec.contrast_range;
            let contrast = rng.gen_range(clo..=chi);

            out.push(jittered_crop(
                sample,
                (x0, y0),
                side,
                gains,
                contrast,
                format!("{}#crop{}", sample.source_id, k),
            ));
        }
    }
    Ok(out)
}

fn jittered_crop(
    sample: &Sample,
    (x0, y0): (usize, usize),
    side: usize,
    gains: [f32; 3],
    contrast: f32,
    source_id: String,
) -> Sample {
    let w = sample.width();
    let data = sample.image.data();

    // Mean intensity of the original patch, pooled over channels. Summed
    // in f64 in a fixed order so the result is reproducible.
    let mut sum = 0.0f64;
    for y in y0..y0 + side {
        let row = &data[3 * (y * w + x0)..3 * (y * w + x0 + side)];
        for v in row {
            sum += *v as f64;
        }
    }
    let mean = (sum / (3 * side * side) as f64) as f32;

    let mut image = RgbRaster::filled(side, side, [0.0; 3]);
    for y in 0..side {
        let src = &data[3 * ((y0 + y) * w + x0)..3 * ((y0 + y) * w + x0 + side)];
        let dst = &mut image.data_mut()[3 * y * side..3 * (y + 1) * side];
        for x in 0..side {
            for ch in 0..3 {
                let v = src[3 * x + ch];
                dst[3 * x + ch] =
                    (contrast * gains[ch] * v + (1.0 - contrast) * mean).clamp(0.0, 1.0);
            }
        }
    }

    let mut target = AffordanceTensor::zeros(side, side);
    for a in 0..AFFORDANCE_COUNT {
        let src = sample.target.channel(a);
        let dst = &mut target.values_mut()[a * side * side..(a + 1) * side * side];
        for y in 0..side {
            dst[y * side..(y + 1) * side]
                .copy_from_slice(&src[(y0 + y) * w + x0..(y0 + y) * w + x0 + side]);
        }
    }

    let mut mask = CoverageMask::all_invalid(side, side);
    for y in 0..side {
        mask.values_mut()[y * side..(y + 1) * side]
            .copy_from_slice(&sample.mask.values()[(y0 + y) * w + x0..(y0 + y) * w + x0 + side]);
    }

    Sample {
        image,
        target,
        mask,
        source_id,
    }
}

/// Concatenates two datasets and shuffles the result with a seeded
/// Fisher-Yates pass, so mixed datasets are reproducible.
pub fn mix_datasets(mut first: Vec<Sample>, second: Vec<Sample>, seed: u64) -> Vec<Sample> {
    first.extend(second);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    first.shuffle(&mut rng);
    first
}
