//! The on-disk dataset layout: a JSON manifest listing, per sample, the
//! image, target, and mask files by path relative to the manifest itself.

use std::fs;
use std::path::{Path, PathBuf};

use afford_core::io as core_io;
use serde::{Deserialize, Serialize};

use crate::{MapgenError, Sample};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image: String,
    pub target: String,
    pub mask: String,
    pub source_id: String,
}

/// Writes the manifest atomically as a JSON list.
pub fn write_manifest(path: impl AsRef<Path>, entries: &[ManifestEntry]) -> Result<(), MapgenError> {
    let mut bytes = serde_json::to_vec_pretty(entries)?;
    bytes.push(b'\n');
    core_io::write_file_atomic(path, &bytes)?;
    Ok(())
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>, MapgenError> {
    let bytes = fs::read(path)?;
    Ok(serde_json::from_slice(&bytes)?)
}

/// Loads one sample, resolving the entry's paths against the directory
/// containing the manifest.
pub fn load_sample(manifest_dir: &Path, entry: &ManifestEntry) -> Result<Sample, MapgenError> {
    let image = core_io::load_rgb_png(manifest_dir.join(&entry.image))?;
    let target = core_io::load_tensor(manifest_dir.join(&entry.target))?;
    let mask = core_io::load_mask(manifest_dir.join(&entry.mask))?;
    Sample::new(image, target, mask, entry.source_id.clone())
}

pub fn load_dataset(manifest_path: impl AsRef<Path>) -> Result<Vec<Sample>, MapgenError> {
    let manifest_path = manifest_path.as_ref();
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    read_manifest(manifest_path)?
        .iter()
        .map(|entry| load_sample(dir, entry))
        .collect()
}

/// Writes a dataset under `dir` (images/, targets/, masks/ plus
/// manifest.json) and returns the manifest path. Images are stored as
/// 8-bit PNG, so their values quantize to multiples of 1/255; targets and
/// masks round-trip exactly.
pub fn save_dataset(dir: impl AsRef<Path>, samples: &[Sample]) -> Result<PathBuf, MapgenError> {
    let dir = dir.as_ref();
    for sub in ["images", "targets", "masks"] {
        fs::create_dir_all(dir.join(sub))?;
    }
    let mut entries = Vec::with_capacity(samples.len());
    for (i, sample) in samples.iter().enumerate() {
        let entry = ManifestEntry {
            image: format!("images/{i:04}.png"),
            target: format!("targets/{i:04}.afmt"),
            mask: format!("masks/{i:04}.afmk"),
            source_id: sample.source_id.clone(),
        };
        core_io::save_rgb_png(dir.join(&entry.image), &sample.image)?;
        core_io::save_tensor(dir.join(&entry.target), &sample.target)?;
        core_io::save_mask(dir.join(&entry.mask), &sample.mask)?;
        entries.push(entry);
    }
    let manifest_path = dir.join("manifest.json");
    write_manifest(&manifest_path, &entries)?;
    Ok(manifest_path)
}
