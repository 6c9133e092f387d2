//! Core types shared by every part of the affordance toolkit: the fixed
//! 15-affordance vocabulary, RGB rasters, part-label maps, dense affordance
//! tensors with coverage masks, and the binary file formats that carry them
//! between tools.

pub mod error;
pub mod io;
pub mod raster;
pub mod tensor;
pub mod vocabulary;

pub use error::CoreError;
pub use raster::{PartLabelMap, RgbRaster};
pub use tensor::{AffordanceTensor, AffordanceVector, CoverageMask};
pub use vocabulary::{Affordance, AFFORDANCE_COUNT, AFFORDANCE_NAMES};
