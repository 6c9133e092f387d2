//! Optional JSON config file mirroring the command-line flags. Every
//! field is optional; explicitly passed flags always win.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub maps: MapsSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub threshold: ThresholdSection,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default)]
    pub report: ReportSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SimulateSection {
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub size: Option<String>,
    pub room_mix: Option<f64>,
    pub table: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct MapsSection {
    pub labels: Option<PathBuf>,
    pub legend: Option<PathBuf>,
    pub table: Option<PathBuf>,
    pub out_prefix: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct TrainSection {
    pub train: Option<PathBuf>,
    pub val: Option<PathBuf>,
    pub k: Option<usize>,
    pub masked: Option<bool>,
    pub freeze_encoder: Option<bool>,
    pub epochs: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ThresholdSection {
    pub pred: Option<PathBuf>,
    pub ckpt: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct EvalSection {
    pub ckpt: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub thresholds: Option<PathBuf>,
    pub mode: Option<String>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ReportSection {
    pub eval: Option<PathBuf>,
    pub overlay_out: Option<PathBuf>,
    pub channels: Option<String>,
}

pub fn load_file_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}
