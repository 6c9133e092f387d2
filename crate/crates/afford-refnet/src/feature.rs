//! Dense feature maps in f64, channel-major like the rest of the
//! pipeline: index `(c * height + y) * width + x`.

use afford_core::{AffordanceTensor, RgbRaster, AFFORDANCE_COUNT};

use crate::RefnetError;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub values: Vec<f64>,
}

impl FeatureMap {
    pub fn zeros(channels: usize, height: usize, width: usize) -> FeatureMap {
        FeatureMap {
            channels,
            height,
            width,
            values: vec![0.0; channels * height * width],
        }
    }

    pub fn from_values(
        channels: usize,
        height: usize,
        width: usize,
        values: Vec<f64>,
    ) -> Result<FeatureMap, RefnetError> {
        if values.len() != channels * height * width {
            return Err(RefnetError::Argument(format!(
                "feature map data has {} values, expected {}x{}x{}",
                values.len(),
                channels,
                height,
                width
            )));
        }
        Ok(FeatureMap {
            channels,
            height,
            width,
            values,
        })
    }

    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.values[(c * self.height + y) * self.width + x]
    }

    pub fn set(&mut self, c: usize, y: usize, x: usize, value: f64) {
        self.values[(c * self.height + y) * self.width + x] = value;
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let pixels = self.height * self.width;
        &self.values[c * pixels..(c + 1) * pixels]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        let pixels = self.height * self.width;
        &mut self.values[c * pixels..(c + 1) * pixels]
    }

    /// Widens an interleaved RGB raster into a 3-channel planar map.
    pub fn from_raster(raster: &RgbRaster) -> FeatureMap {
        let (h, w) = (raster.height(), raster.width());
        let mut map = FeatureMap::zeros(3, h, w);
        let data = raster.data();
        for y in 0..h {
            for x in 0..w {
                let base = 3 * (y * w + x);
                for c in 0..3 {
                    map.values[(c * h + y) * w + x] = data[base + c] as f64;
                }
            }
        }
        map
    }

    /// Narrows a 15-channel map into an affordance tensor. Values are
    /// clamped to [0, 1]; f32 rounding can push a sigmoid output a hair
    /// past the boundary.
    pub fn to_tensor(&self) -> Result<AffordanceTensor, RefnetError> {
        if self.channels != AFFORDANCE_COUNT {
            return Err(RefnetError::Argument(format!(
                "feature map has {} channels, expected {AFFORDANCE_COUNT}",
                self.channels
            )));
        }
        let values: Vec<f32> = self
            .values
            .iter()
            .map(|v| (*v as f32).clamp(0.0, 1.0))
            .collect();
        Ok(AffordanceTensor::from_values(self.height, self.width, values)?)
    }
}
