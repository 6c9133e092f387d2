//! Batch generation: sampled scenes rendered into image/target/mask
//! triples and written out as a manifest-backed dataset.

use std::path::{Path, PathBuf};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use afford_mapgen::{save_dataset, Sample};
use afford_transfer::TransferTable;

use crate::render::render_affordance_pass;
use crate::scene::{sample_scene, RoomKind};
use crate::SimError;

/// Salt for the room-choice stream, so the coin that picks kitchen vs
/// living room is independent of the scene content stream.
const ROOM_SALT: u64 = 0x524F_4F4D_C01F_F1B5;

/// Stride mixing the sample index into the dataset seed. Consecutive
/// indices land on unrelated scene seeds, and two datasets with nearby
/// seeds do not share scenes.
const INDEX_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerateOptions {
    pub count: usize,
    pub seed: u64,
    /// Probability that a sample is a kitchen; the rest are living rooms.
    pub room_mix: f64,
    pub width: usize,
    pub height: usize,
}

impl Default for GenerateOptions {
    fn default() -> GenerateOptions {
        GenerateOptions {
            count: 10,
            seed: 0,
            room_mix: 0.5,
            width: 64,
            height: 64,
        }
    }
}

fn scene_seed(opts: &GenerateOptions, index: usize) -> u64 {
    opts.seed.wrapping_add((index as u64).wrapping_mul(INDEX_STRIDE))
}

/// Generates `opts.count` fully-labeled samples in memory.
pub fn generate_samples(
    opts: &GenerateOptions,
    table: &TransferTable,
) -> Result<Vec<Sample>, SimError> {
    if opts.count == 0 {
        return Err(SimError::argument("sample count must be at least 1"));
    }
    if !(0.0..=1.0).contains(&opts.room_mix) {
        return Err(SimError::argument(format!(
            "room mix {} outside [0, 1]",
            opts.room_mix
        )));
    }
    let mut samples = Vec::with_capacity(opts.count);
    for index in 0..opts.count {
        let seed = scene_seed(opts, index);
        let kitchen = ChaCha8Rng::seed_from_u64(seed ^ ROOM_SALT).gen_bool(opts.room_mix);
        let room = if kitchen {
            RoomKind::Kitchen
        } else {
            RoomKind::LivingRoom
        };
        let spec = sample_scene(seed, room);
        samples.push(render_affordance_pass(&spec, opts.width, opts.height, table)?);
    }
    Ok(samples)
}

/// Generates samples and writes them under `out_dir` as PNG images,
/// tensor/mask files, and a `manifest.json`. Returns the manifest path.
pub fn generate_dataset(
    out_dir: &Path,
    opts: &GenerateOptions,
    table: &TransferTable,
) -> Result<PathBuf, SimError> {
    let samples = generate_samples(opts, table)?;
    Ok(save_dataset(out_dir, &samples)?)
}
