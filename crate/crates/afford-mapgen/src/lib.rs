//! Dataset assembly for affordance training: in-memory samples, crop and
//! photometric augmentation, dataset mixing, and the on-disk manifest
//! format tying images, targets, and masks together.

pub mod augment;
pub mod manifest;
pub mod sample;

pub use augment::{crop_augment, mix_datasets, AugmentSpec};
pub use manifest::{
    load_dataset, load_sample, read_manifest, save_dataset, write_manifest, ManifestEntry,
};
pub use sample::Sample;

use afford_core::CoreError;

#[derive(Debug, thiserror::Error)]
pub enum MapgenError {
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("manifest is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Argument(String),
}

impl MapgenError {
    pub(crate) fn argument(message: impl Into<String>) -> MapgenError {
        MapgenError::Argument(message.into())
    }
}
