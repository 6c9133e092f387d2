//! Dense affordance data: per-label vectors, per-pixel tensors, and the
//! coverage masks that say which pixels carry supervision.

use crate::error::CoreError;
use crate::vocabulary::{Affordance, AFFORDANCE_COUNT};

/// The three presence levels a label can assign to an affordance.
pub const PRESENCE_LEVELS: [f32; 3] = [0.0, 0.5, 1.0];

/// Affordance presence for one label path: absent (0), partial (0.5) or
/// present (1) per affordance, in vocabulary order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffordanceVector([f32; AFFORDANCE_COUNT]);

impl AffordanceVector {
    pub fn zeros() -> AffordanceVector {
        AffordanceVector([0.0; AFFORDANCE_COUNT])
    }

    /// Builds a vector, rejecting any value outside {0, 0.5, 1}.
    pub fn new(values: [f32; AFFORDANCE_COUNT]) -> Result<AffordanceVector, CoreError> {
        for (i, v) in values.iter().enumerate() {
            if !PRESENCE_LEVELS.contains(v) {
                return Err(CoreError::validation(format!(
                    "presence value {v} for affordance '{}' is not one of 0, 0.5, 1",
                    Affordance::ALL[i].name()
                )));
            }
        }
        Ok(AffordanceVector(values))
    }

    pub fn get(&self, affordance: Affordance) -> f32 {
        self.0[affordance.index()]
    }

    pub fn values(&self) -> &[f32; AFFORDANCE_COUNT] {
        &self.0
    }
}

/// Per-pixel affordance maps with 15 channels, stored channel-major: the
/// value for (channel `a`, row `y`, column `x`) lives at
/// `(a * height + y) * width + x`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffordanceTensor {
    height: usize,
    width: usize,
    values: Vec<f32>,
}

impl AffordanceTensor {
    pub fn zeros(height: usize, width: usize) -> AffordanceTensor {
        AffordanceTensor {
            height,
            width,
            values: vec![0.0; AFFORDANCE_COUNT * height * width],
        }
    }

    /// Builds a tensor from channel-major values, validating the element
    /// count and that every value is finite and within [0, 1].
    pub fn from_values(
        height: usize,
        width: usize,
        values: Vec<f32>,
    ) -> Result<AffordanceTensor, CoreError> {
        let expected = AFFORDANCE_COUNT * height * width;
        if values.len() != expected {
            return Err(CoreError::validation(format!(
                "tensor data has {} values, expected {} ({}x{}x{})",
                values.len(),
                expected,
                AFFORDANCE_COUNT,
                height,
                width
            )));
        }
        let tensor = AffordanceTensor {
            height,
            width,
            values,
        };
        tensor.validate()?;
        Ok(tensor)
    }

    pub fn channels(&self) -> usize {
        AFFORDANCE_COUNT
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn get(&self, affordance: usize, y: usize, x: usize) -> f32 {
        self.values[(affordance * self.height + y) * self.width + x]
    }

    pub fn set(&mut self, affordance: usize, y: usize, x: usize, value: f32) {
        self.values[(affordance * self.height + y) * self.width + x] = value;
    }

    /// One channel as a contiguous row-major slice.
    pub fn channel(&self, affordance: usize) -> &[f32] {
        let pixels = self.pixels();
        &self.values[affordance * pixels..(affordance + 1) * pixels]
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// Mutable access to the raw values. Callers must keep every value
    /// finite and in [0, 1]; the format layer re-checks on write.
    pub fn values_mut(&mut self) -> &mut [f32] {
        &mut self.values
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        for (i, v) in self.values.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 || *v > 1.0 {
                return Err(CoreError::validation(format!(
                    "tensor value {v} at flat index {i} is outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Per-pixel supervision validity: 1 where the affordance channels are
/// trustworthy, 0 where they must be ignored. Row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageMask {
    height: usize,
    width: usize,
    valid: Vec<u8>,
}

impl CoverageMask {
    pub fn all_valid(height: usize, width: usize) -> CoverageMask {
        CoverageMask {
            height,
            width,
            valid: vec![1; height * width],
        }
    }

    pub fn all_invalid(height: usize, width: usize) -> CoverageMask {
        CoverageMask {
            height,
            width,
            valid: vec![0; height * width],
        }
    }

    pub fn from_values(
        height: usize,
        width: usize,
        valid: Vec<u8>,
    ) -> Result<CoverageMask, CoreError> {
        if valid.len() != height * width {
            return Err(CoreError::validation(format!(
                "mask data has {} values, expected {}",
                valid.len(),
                height * width
            )));
        }
        let mask = CoverageMask {
            height,
            width,
            valid,
        };
        mask.validate()?;
        Ok(mask)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn is_valid(&self, y: usize, x: usize) -> bool {
        self.valid[y * self.width + x] == 1
    }

    pub fn set(&mut self, y: usize, x: usize, valid: bool) {
        self.valid[y * self.width + x] = valid as u8;
    }

    pub fn count_valid(&self) -> usize {
        self.valid.iter().filter(|v| **v == 1).count()
    }

    pub fn values(&self) -> &[u8] {
        &self.valid
    }

    pub fn values_mut(&mut self) -> &mut [u8] {
        &mut self.valid
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        for (i, v) in self.valid.iter().enumerate() {
            if *v > 1 {
                return Err(CoreError::validation(format!(
                    "mask value {v} at flat index {i} is not 0 or 1"
                )));
            }
        }
        Ok(())
    }
}
