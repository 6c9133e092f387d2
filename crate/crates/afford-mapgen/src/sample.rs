//! A training sample: one RGB image with its affordance target and
//! coverage mask, all sharing the same pixel grid.

use afford_core::{AffordanceTensor, CoverageMask, RgbRaster};

use crate::MapgenError;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub image: RgbRaster,
    pub target: AffordanceTensor,
    pub mask: CoverageMask,
    /// Provenance string, e.g. a scene seed or `parent#crop3`.
    pub source_id: String,
}

impl Sample {
    pub fn new(
        image: RgbRaster,
        target: AffordanceTensor,
        mask: CoverageMask,
        source_id: impl Into<String>,
    ) -> Result<Sample, MapgenError> {
        if image.height() != target.height()
            || image.width() != target.width()
            || image.height() != mask.height()
            || image.width() != mask.width()
        {
            return Err(MapgenError::argument(format!(
                "sample shapes disagree: image {}x{}, target {}x{}, mask {}x{}",
                image.height(),
                image.width(),
                target.height(),
                target.width(),
                mask.height(),
                mask.width()
            )));
        }
        Ok(Sample {
            image,
            target,
            mask,
            source_id: source_id.into(),
        })
    }

    pub fn height(&self) -> usize {
        self.image.height()
    }

    pub fn width(&self) -> usize {
        self.image.width()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mismatched_shapes_are_rejected() {
        let image = RgbRaster::filled(4, 4, [0.0; 3]);
        let target = AffordanceTensor::zeros(4, 4);
        let mask = CoverageMask::all_valid(3, 4);
        assert!(Sample::new(image, target, mask, "x").is_err());
    }

    #[test]
    fn matching_shapes_are_accepted() {
        let image = RgbRaster::filled(5, 4, [0.5; 3]);
        let target = AffordanceTensor::zeros(4, 5);
        let mask = CoverageMask::all_valid(4, 5);
        let s = Sample::new(image, target, mask, "scene-7").unwrap();
        assert_eq!((s.height(), s.width()), (4, 5));
        assert_eq!(s.source_id, "scene-7");
    }
}
