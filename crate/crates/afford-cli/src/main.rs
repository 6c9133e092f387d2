//! `afford`: the pipeline binary. Simulates datasets, maps part labels to
//! affordance targets, trains the refinement network, calibrates decision
//! thresholds, evaluates checkpoints, and renders probability overlays.
//!
//! Exit codes: 0 on success, 1 on runtime/data errors (reported as one
//! machine-parsable JSON line on stderr), 2 on flag errors (reported as
//! usage text).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "afford",
    version,
    about = "Affordance segmentation pipeline: simulate, map, train, evaluate"
)]
struct Cli {
    /// JSON file mirroring the flags of every subcommand; explicitly
    /// passed flags take precedence over its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a simulated dataset and print its manifest path.
    Simulate(SimulateArgs),
    /// Resolve a part-label map into an affordance tensor and coverage mask.
    Maps(MapsArgs),
    /// Train the refinement network and write a checkpoint plus history.
    Train(TrainArgs),
    /// Calibrate per-affordance decision thresholds against a dataset.
    Threshold(ThresholdArgs),
    /// Evaluate a checkpoint on a dataset and write a metrics report.
    Eval(EvalArgs),
    /// Render per-affordance probability overlays from an eval report.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of scenes to generate [default: 10].
    #[arg(long)]
    pub count: Option<usize>,
    /// Base seed; scene i derives its own stream from it [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Render size [default: 64x64].
    #[arg(long, value_name = "WxH")]
    pub size: Option<String>,
    /// Fraction of kitchen scenes, the rest are living rooms [default: 0.5].
    #[arg(long = "room-mix")]
    pub room_mix: Option<f64>,
    /// Transfer table (TSV) covering the full scene catalog.
    #[arg(long, value_name = "PATH")]
    pub table: Option<PathBuf>,
    /// Output directory for images, targets, masks, and the manifest.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MapsArgs {
    /// Part-label map (PLBL index plane).
    #[arg(long, value_name = "PLBL")]
    pub labels: Option<PathBuf>,
    /// Legend sidecar (JSON, index to label path).
    #[arg(long, value_name = "JSON")]
    pub legend: Option<PathBuf>,
    /// Transfer table (TSV).
    #[arg(long, value_name = "TSV")]
    pub table: Option<PathBuf>,
    /// Output prefix; writes PREFIX.afmt and PREFIX.afmk.
    #[arg(long = "out-prefix", value_name = "PREFIX")]
    pub out_prefix: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training dataset manifest.
    #[arg(long, value_name = "MANIFEST")]
    pub train: Option<PathBuf>,
    /// Validation dataset manifest.
    #[arg(long, value_name = "MANIFEST")]
    pub val: Option<PathBuf>,
    /// Refinement width multiplier [default: 3].
    #[arg(long)]
    pub k: Option<usize>,
    /// Use the masked loss (true) or the plain one (false) [default: true].
    #[arg(long)]
    pub masked: Option<bool>,
    /// Keep encoder weights at their initialization [default: true].
    #[arg(long = "freeze-encoder")]
    pub freeze_encoder: Option<bool>,
    /// Epoch budget; early stopping may end training sooner [default: 50].
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Seed for weight init and epoch shuffling [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Checkpoint output path; history goes next to it as *.history.json.
    #[arg(long, value_name = "CKPT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Manifest of samples to calibrate against.
    #[arg(long, value_name = "MANIFEST")]
    pub pred: Option<PathBuf>,
    /// Checkpoint to produce predictions with.
    #[arg(long, value_name = "CKPT")]
    pub ckpt: Option<PathBuf>,
    /// Output path for the threshold set (JSON).
    #[arg(long, value_name = "JSON")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Checkpoint to evaluate.
    #[arg(long, value_name = "CKPT")]
    pub ckpt: Option<PathBuf>,
    /// Dataset manifest to evaluate on.
    #[arg(long, value_name = "MANIFEST")]
    pub data: Option<PathBuf>,
    /// Threshold set (JSON) from the threshold subcommand.
    #[arg(long, value_name = "JSON")]
    pub thresholds: Option<PathBuf>,
    /// Accuracy convention: paper or standard [default: standard].
    #[arg(long)]
    pub mode: Option<String>,
    /// Report output path; predictions go next to it in *_predictions/.
    #[arg(long, value_name = "REPORT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Evaluation report written by the eval subcommand.
    #[arg(long, value_name = "REPORT")]
    pub eval: Option<PathBuf>,
    /// Directory for the rendered overlay PNGs.
    #[arg(long = "overlay-out", value_name = "DIR")]
    pub overlay_out: Option<PathBuf>,
    /// Three affordances mapped to red, green, blue
    /// [default: place-on,walk,grasp].
    #[arg(long, value_name = "R,G,B")]
    pub channels: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad or missing flags: exit code 2, human-readable usage text.
    #[error("{message}")]
    Usage { message: String, usage: String },
    /// Anything that went wrong after flag validation: exit code 1, one
    /// JSON line on stderr.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn runtime(message: impl Into<String>) -> CliError {
        CliError::Runtime(message.into())
    }
}

/// Usage error for `subcommand`, rendered with clap's own usage line so
/// the output matches what `--help` shows.
pub fn usage_error(subcommand: &str, message: impl Into<String>) -> CliError {
    let mut root = Cli::command();
    root.build();
    let usage = root
        .find_subcommand_mut(subcommand)
        .map(|c| format!("{}\n\nFor details, run: afford {subcommand} --help", c.render_usage()))
        .unwrap_or_default();
    CliError::Usage {
        message: message.into(),
        usage,
    }
}

macro_rules! runtime_from {
    ($($ty:ty),* $(,)?) => {
        $(impl From<$ty> for CliError {
            fn from(error: $ty) -> CliError {
                CliError::Runtime(error.to_string())
            }
        })*
    };
}

runtime_from!(
    afford_core::CoreError,
    afford_transfer::TransferError,
    afford_mapgen::MapgenError,
    afford_simkit::SimError,
    afford_evalkit::EvalError,
    afford_refnet::RefnetError,
);

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::new().filter("AFFORD_LOG")).init();

    let result = config::load_file_config(cli.config.as_deref()).and_then(|file| {
        match cli.command {
            Command::Simulate(args) => commands::simulate(args, &file),
            Command::Maps(args) => commands::maps(args, &file),
            Command::Train(args) => commands::train(args, &file),
            Command::Threshold(args) => commands::threshold(args, &file),
            Command::Eval(args) => commands::eval(args, &file),
            Command::Report(args) => commands::report(args, &file),
        }
    });

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage { message, usage }) => {
            eprintln!("error: {message}");
            eprintln!();
            eprintln!("{usage}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(message)) => {
            eprintln!("{}", serde_json::json!({ "error": message }));
            ExitCode::from(1)
        }
    }
}
