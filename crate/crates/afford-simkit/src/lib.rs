//! Procedural indoor-scene generator with dense part labels.
//!
//! A scene is sampled from a seed into a [`SceneSpec`] (objects, camera,
//! illumination), rendered into an RGB image plus a per-pixel part-label
//! map, and the labels are turned into an affordance target through a
//! [`TransferTable`]. Every pixel gets a label, so generated samples
//! always come with an all-ones coverage mask.

mod catalog;
mod dataset;
mod render;
mod scene;

pub use catalog::{catalog_legend, label_index, Material, ObjectKind, CATALOG_LABELS};
pub use dataset::{generate_dataset, generate_samples, GenerateOptions};
pub use render::{render_affordance_pass, render_scene, MIN_RENDER_SIDE};
pub use scene::{
    sample_scene, Camera, Illumination, ObjectInstance, Part, RoomKind, SceneSpec, Shape, HORIZON,
    ROOM_WIDTH, WORLD_HEIGHT, WORLD_WIDTH,
};

use afford_transfer::TransferTable;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Core(#[from] afford_core::CoreError),
    #[error(transparent)]
    Transfer(#[from] afford_transfer::TransferError),
    #[error(transparent)]
    Mapgen(#[from] afford_mapgen::MapgenError),
    #[error("{0}")]
    Argument(String),
    #[error("configuration error: {0}")]
    Config(String),
}

impl SimError {
    pub(crate) fn argument(message: impl Into<String>) -> SimError {
        SimError::Argument(message.into())
    }
}

/// The transfer table bundled with the generator. It covers every label
/// the catalog can emit; a parse failure here is a build defect, not a
/// runtime condition.
pub fn builtin_table() -> TransferTable {
    TransferTable::parse(include_str!("../data/transfer_table.tsv"))
        .expect("bundled transfer table parses")
}
