//! RGB rasters and part-label maps.

use std::collections::BTreeMap;

use crate::error::CoreError;

/// An RGB image with values in [0, 1], stored row-major with interleaved
/// channels: the pixel at (x, y) occupies `data[3 * (y * width + x)..][..3]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbRaster {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl RgbRaster {
    /// A raster filled with a single color.
    pub fn filled(width: usize, height: usize, rgb: [f32; 3]) -> RgbRaster {
        let mut data = Vec::with_capacity(3 * width * height);
        for _ in 0..width * height {
            data.extend_from_slice(&rgb);
        }
        RgbRaster {
            width,
            height,
            data,
        }
    }

    pub fn from_values(
        width: usize,
        height: usize,
        data: Vec<f32>,
    ) -> Result<RgbRaster, CoreError> {
        if data.len() != 3 * width * height {
            return Err(CoreError::validation(format!(
                "raster data has {} values, expected {}",
                data.len(),
                3 * width * height
            )));
        }
        for (i, v) in data.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 || *v > 1.0 {
                return Err(CoreError::validation(format!(
                    "raster value {v} at flat index {i} is outside [0, 1]"
                )));
            }
        }
        Ok(RgbRaster {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        let base = 3 * (y * self.width + x);
        [self.data[base], self.data[base + 1], self.data[base + 2]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [f32; 3]) {
        let base = 3 * (y * self.width + x);
        self.data[base..base + 3].copy_from_slice(&rgb);
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }
}

/// Dense per-pixel part labels. Index 0 is reserved for "unlabeled"; every
/// other index used in the map must appear in the legend, which maps it to a
/// lowercase `/`-separated label path such as `table/top`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartLabelMap {
    width: usize,
    height: usize,
    indices: Vec<u16>,
    legend: BTreeMap<u16, String>,
}

/// Checks legend path syntax: nonempty, lowercase, `/`-separated with no
/// empty segments.
pub fn validate_label_path(path: &str) -> Result<(), CoreError> {
    if path.is_empty() {
        return Err(CoreError::validation("label path is empty".to_string()));
    }
    if path.chars().any(|c| c.is_ascii_uppercase()) {
        return Err(CoreError::validation(format!(
            "label path '{path}' contains uppercase characters"
        )));
    }
    if path.split('/').any(str::is_empty) {
        return Err(CoreError::validation(format!(
            "label path '{path}' has an empty segment"
        )));
    }
    Ok(())
}

impl PartLabelMap {
    pub fn new(
        width: usize,
        height: usize,
        indices: Vec<u16>,
        legend: BTreeMap<u16, String>,
    ) -> Result<PartLabelMap, CoreError> {
        if indices.len() != width * height {
            return Err(CoreError::validation(format!(
                "label map has {} indices, expected {}",
                indices.len(),
                width * height
            )));
        }
        if legend.contains_key(&0) {
            return Err(CoreError::validation(
                "legend defines index 0, which is reserved for unlabeled pixels".to_string(),
            ));
        }
        for path in legend.values() {
            validate_label_path(path)?;
        }
        for index in &indices {
            if *index != 0 && !legend.contains_key(index) {
                return Err(CoreError::validation(format!(
                    "label index {index} is used but missing from the legend"
                )));
            }
        }
        Ok(PartLabelMap {
            width,
            height,
            indices,
            legend,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn index_at(&self, x: usize, y: usize) -> u16 {
        self.indices[y * self.width + x]
    }

    /// The label path at a pixel, or `None` for unlabeled pixels.
    pub fn path_at(&self, x: usize, y: usize) -> Option<&str> {
        match self.index_at(x, y) {
            0 => None,
            index => self.legend.get(&index).map(String::as_str),
        }
    }

    pub fn indices(&self) -> &[u16] {
        &self.indices
    }

    pub fn legend(&self) -> &BTreeMap<u16, String> {
        &self.legend
    }
}
