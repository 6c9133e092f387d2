//! One function per subcommand. Each merges its flags with the config
//! file (flags win), validates, delegates to the library crates, and
//! prints the paths it wrote, one per line.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use afford_core::io::{
    load_tensor, read_label_map, read_legend, save_mask, save_rgb_png, save_tensor,
    write_file_atomic,
};
use afford_core::{Affordance, AffordanceTensor, RgbRaster};
use afford_evalkit::{
    binarize, binarize_truth, default_grid, threshold_sweep, MetricsAccumulator, MetricsMode,
    MetricsReport, SweepPair, ThresholdSet,
};
use afford_mapgen::{load_sample, read_manifest, Sample};
use afford_refnet::{
    forward, load_checkpoint, save_checkpoint, save_history, LossMode, ModelConfig, ModelParams,
    TrainConfig, DEFAULT_DEPTH,
};
use afford_simkit::{generate_dataset, GenerateOptions, CATALOG_LABELS, MIN_RENDER_SIDE};
use afford_transfer::TransferTable;

use crate::config::FileConfig;
use crate::{
    usage_error, CliError, EvalArgs, MapsArgs, ReportArgs, SimulateArgs, ThresholdArgs, TrainArgs,
};

/// Prefixes an error with the file it came from, so parse failures name
/// the offending path alongside the line or byte offset they carry.
fn at_file<E: std::fmt::Display>(path: &Path) -> impl Fn(E) -> CliError + '_ {
    move |error| CliError::runtime(format!("{}: {error}", path.display()))
}

fn require<T>(value: Option<T>, subcommand: &str, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| usage_error(subcommand, format!("missing required flag --{flag}")))
}

fn load_table(path: &Path) -> Result<TransferTable, CliError> {
    let text = fs::read_to_string(path).map_err(at_file(path))?;
    TransferTable::parse(&text).map_err(at_file(path))
}

fn parse_size(size: &str) -> Option<(usize, usize)> {
    let (w, h) = size.split_once('x')?;
    Some((w.parse().ok()?, h.parse().ok()?))
}

pub fn simulate(args: SimulateArgs, file: &FileConfig) -> Result<(), CliError> {
    let section = &file.simulate;
    let count = args.count.or(section.count).unwrap_or(10);
    let seed = args.seed.or(section.seed).unwrap_or(0);
    let size = args
        .size
        .or_else(|| section.size.clone())
        .unwrap_or_else(|| "64x64".to_string());
    let room_mix = args.room_mix.or(section.room_mix).unwrap_or(0.5);
    let table_path = require(args.table.or_else(|| section.table.clone()), "simulate", "table")?;
    let out = require(args.out.or_else(|| section.out.clone()), "simulate", "out")?;

    let (width, height) = parse_size(&size).ok_or_else(|| {
        usage_error("simulate", format!("--size must be WIDTHxHEIGHT, got '{size}'"))
    })?;
    if width < MIN_RENDER_SIDE || height < MIN_RENDER_SIDE {
        return Err(usage_error(
            "simulate",
            format!("--size sides must be at least {MIN_RENDER_SIDE}, got {width}x{height}"),
        ));
    }
    if count == 0 {
        return Err(usage_error("simulate", "--count must be at least 1"));
    }
    if !(0.0..=1.0).contains(&room_mix) {
        return Err(usage_error(
            "simulate",
            format!("--room-mix must be in [0, 1], got {room_mix}"),
        ));
    }

    let table = load_table(&table_path)?;
    for label in CATALOG_LABELS {
        if table.resolve(label).is_none() {
            return Err(CliError::runtime(format!(
                "{}: no rule covers catalog label '{label}'",
                table_path.display()
            )));
        }
    }

    log::info!("generating {count} scenes at {width}x{height}, seed {seed}");
    let opts = GenerateOptions {
        count,
        seed,
        room_mix,
        width,
        height,
    };
    let manifest = generate_dataset(&out, &opts, &table)?;
    println!("{}", manifest.display());
    Ok(())
}

pub fn maps(args: MapsArgs, file: &FileConfig) -> Result<(), CliError> {
    let section = &file.maps;
    let labels_path = require(args.labels.or_else(|| section.labels.clone()), "maps", "labels")?;
    let legend_path = require(args.legend.or_else(|| section.legend.clone()), "maps", "legend")?;
    let table_path = require(args.table.or_else(|| section.table.clone()), "maps", "table")?;
    let out_prefix = require(
        args.out_prefix.or_else(|| section.out_prefix.clone()),
        "maps",
        "out-prefix",
    )?;

    let legend =
        read_legend(fs::File::open(&legend_path).map_err(at_file(&legend_path))?)
            .map_err(at_file(&legend_path))?;
    let label_map =
        read_label_map(fs::File::open(&labels_path).map_err(at_file(&labels_path))?, legend)
            .map_err(at_file(&labels_path))?;
    let table = load_table(&table_path)?;

    let (tensor, mask) = table.resolve_map(&label_map);
    let tensor_path = with_suffix(&out_prefix, ".afmt");
    let mask_path = with_suffix(&out_prefix, ".afmk");
    save_tensor(&tensor_path, &tensor).map_err(at_file(&tensor_path))?;
    save_mask(&mask_path, &mask).map_err(at_file(&mask_path))?;
    log::info!(
        "resolved {} of {} pixels",
        mask.count_valid(),
        label_map.width() * label_map.height()
    );
    println!("{}", tensor_path.display());
    println!("{}", mask_path.display());
    Ok(())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut os = prefix.as_os_str().to_owned();
    os.push(suffix);
    PathBuf::from(os)
}

/// "model.afpw" trains alongside "model.history.json".
fn history_path_for(checkpoint: &Path) -> PathBuf {
    checkpoint.with_extension("history.json")
}

fn load_manifest_samples(path: &Path) -> Result<Vec<Sample>, CliError> {
    let entries = read_manifest(path).map_err(at_file(path))?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    entries
        .iter()
        .map(|entry| load_sample(dir, entry).map_err(at_file(path)))
        .collect()
}

pub fn train(args: TrainArgs, file: &FileConfig) -> Result<(), CliError> {
    let section = &file.train;
    let train_path = require(args.train.or_else(|| section.train.clone()), "train", "train")?;
    let val_path = require(args.val.or_else(|| section.val.clone()), "train", "val")?;
    let out = require(args.out.or_else(|| section.out.clone()), "train", "out")?;
    let k = args.k.or(section.k).unwrap_or(3);
    let masked = args.masked.or(section.masked).unwrap_or(true);
    let freeze_encoder = args
        .freeze_encoder
        .or(section.freeze_encoder)
        .unwrap_or(true);
    let epochs = args.epochs.or(section.epochs).unwrap_or(50);
    let seed = args.seed.or(section.seed).unwrap_or(0);

    if k == 0 {
        return Err(usage_error("train", "--k must be at least 1"));
    }
    if epochs == 0 {
        return Err(usage_error("train", "--epochs must be at least 1"));
    }

    let train_set = load_manifest_samples(&train_path)?;
    let val_set = load_manifest_samples(&val_path)?;

    let config = ModelConfig {
        k,
        depth: DEFAULT_DEPTH,
        seed,
    };
    let tc = TrainConfig {
        epochs_max: epochs,
        loss_mode: if masked {
            LossMode::Masked
        } else {
            LossMode::Unmasked
        },
        encoder_train: !freeze_encoder,
        seed,
        ..TrainConfig::default()
    };
    log::info!(
        "training on {} samples ({} validation), k={k}, up to {epochs} epochs",
        train_set.len(),
        val_set.len()
    );
    let outcome = afford_refnet::train(&config, &train_set, &val_set, &tc)?;
    log::info!(
        "stopped after {} epochs, best epoch {} (val loss {:.6})",
        outcome.history.len(),
        outcome.best_epoch,
        outcome.history[outcome.best_epoch - 1].val_loss
    );

    let history_path = history_path_for(&out);
    save_checkpoint(&out, &config, &outcome.params)?;
    save_history(&history_path, &outcome.history)?;
    println!("{}", out.display());
    println!("{}", history_path.display());
    Ok(())
}

/// Runs the model over every sample of a manifest, in manifest order.
fn predict_all(
    params: &ModelParams,
    config: &ModelConfig,
    samples: &[Sample],
) -> Result<Vec<AffordanceTensor>, CliError> {
    samples
        .iter()
        .map(|sample| Ok(forward(params, config, &sample.image)?.0))
        .collect()
}

pub fn threshold(args: ThresholdArgs, file: &FileConfig) -> Result<(), CliError> {
    let section = &file.threshold;
    let pred_path = require(args.pred.or_else(|| section.pred.clone()), "threshold", "pred")?;
    let ckpt_path = require(args.ckpt.or_else(|| section.ckpt.clone()), "threshold", "ckpt")?;
    let out = require(args.out.or_else(|| section.out.clone()), "threshold", "out")?;

    let (config, params) = load_checkpoint(&ckpt_path).map_err(at_file(&ckpt_path))?;
    let samples = load_manifest_samples(&pred_path)?;
    if samples.is_empty() {
        return Err(CliError::runtime(format!(
            "{}: manifest has no entries",
            pred_path.display()
        )));
    }
    let predictions = predict_all(&params, &config, &samples)?;
    let pairs: Vec<SweepPair> = samples
        .iter()
        .zip(&predictions)
        .map(|(sample, prediction)| SweepPair {
            prediction,
            truth: &sample.target,
            mask: &sample.mask,
        })
        .collect();
    let set = threshold_sweep(&pairs, &default_grid())?;

    let mut json = serde_json::to_vec_pretty(&set)
        .map_err(|e| CliError::runtime(format!("threshold serialization failed: {e}")))?;
    json.push(b'\n');
    write_file_atomic(&out, &json).map_err(at_file(&out))?;
    println!("{}", out.display());
    Ok(())
}

/// The eval report: pooled metrics plus enough per-sample plumbing for
/// the report subcommand to render overlays without re-running the model.
#[derive(Debug, Serialize, Deserialize)]
pub struct EvalReport {
    pub metrics: MetricsReport,
    pub thresholds: ThresholdSet,
    pub samples: Vec<SampleRef>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SampleRef {
    pub source_id: String,
    pub image: String,
    pub prediction: String,
}

/// "eval.json" keeps its per-sample probability tensors in
/// "eval_predictions/".
fn predictions_dir_for(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("eval");
    out.with_file_name(format!("{stem}_predictions"))
}

fn parse_mode(mode: &str) -> Result<MetricsMode, CliError> {
    match mode {
        "paper" => Ok(MetricsMode::Paper),
        "standard" => Ok(MetricsMode::Standard),
        other => Err(usage_error(
            "eval",
            format!("--mode must be 'paper' or 'standard', got '{other}'"),
        )),
    }
}

pub fn eval(args: EvalArgs, file: &FileConfig) -> Result<(), CliError> {
    let section = &file.eval;
    let ckpt_path = require(args.ckpt.or_else(|| section.ckpt.clone()), "eval", "ckpt")?;
    let data_path = require(args.data.or_else(|| section.data.clone()), "eval", "data")?;
    let thresholds_path = require(
        args.thresholds.or_else(|| section.thresholds.clone()),
        "eval",
        "thresholds",
    )?;
    let out = require(args.out.or_else(|| section.out.clone()), "eval", "out")?;
    let mode = parse_mode(
        &args
            .mode
            .or_else(|| section.mode.clone())
            .unwrap_or_else(|| "standard".to_string()),
    )?;

    let (config, params) = load_checkpoint(&ckpt_path).map_err(at_file(&ckpt_path))?;
    let thresholds: ThresholdSet = serde_json::from_str(
        &fs::read_to_string(&thresholds_path).map_err(at_file(&thresholds_path))?,
    )
    .map_err(at_file(&thresholds_path))?;

    let entries = read_manifest(&data_path).map_err(at_file(&data_path))?;
    if entries.is_empty() {
        return Err(CliError::runtime(format!(
            "{}: manifest has no entries",
            data_path.display()
        )));
    }
    let data_dir = data_path.parent().unwrap_or_else(|| Path::new("."));
    let pred_dir = predictions_dir_for(&out);
    fs::create_dir_all(&pred_dir).map_err(at_file(&pred_dir))?;

    let mut accumulator = MetricsAccumulator::new();
    let mut sample_refs = Vec::with_capacity(entries.len());
    for (index, entry) in entries.iter().enumerate() {
        let sample = load_sample(data_dir, entry).map_err(at_file(&data_path))?;
        let (probabilities, _) = forward(&params, &config, &sample.image)?;
        let hard = binarize(&probabilities, &thresholds);
        let truth = binarize_truth(&sample.target);
        accumulator.add(&truth, &hard, &sample.mask)?;

        let prediction_path = pred_dir.join(format!("{index:04}.afmt"));
        save_tensor(&prediction_path, &probabilities).map_err(at_file(&prediction_path))?;
        sample_refs.push(SampleRef {
            source_id: sample.source_id.clone(),
            image: data_dir.join(&entry.image).to_string_lossy().into_owned(),
            prediction: prediction_path.to_string_lossy().into_owned(),
        });
    }

    let metrics = accumulator.finish(mode);
    log::info!(
        "mean IoU {:.4} over {} samples",
        metrics.mean_iou,
        sample_refs.len()
    );
    let report = EvalReport {
        metrics,
        thresholds,
        samples: sample_refs,
    };
    let mut json = serde_json::to_vec_pretty(&report)
        .map_err(|e| CliError::runtime(format!("report serialization failed: {e}")))?;
    json.push(b'\n');
    write_file_atomic(&out, &json).map_err(at_file(&out))?;
    println!("{}", out.display());
    Ok(())
}

fn parse_channels(channels: &str) -> Result<[Affordance; 3], CliError> {
    let picks: Vec<Affordance> = channels
        .split(',')
        .map(str::trim)
        .map(|name| {
            Affordance::parse(name)
                .ok_or_else(|| usage_error("report", format!("unknown affordance '{name}'")))
        })
        .collect::<Result<_, _>>()?;
    picks.try_into().map_err(|_| {
        usage_error(
            "report",
            "--channels needs exactly three comma-separated affordances (red,green,blue)",
        )
    })
}

/// Maps three affordance channels onto RGB intensity. Where affordances
/// co-occur their primaries add up in the composite (overlap of the red
/// and green channels reads as yellow).
fn overlay_raster(probabilities: &AffordanceTensor, picks: &[Affordance; 3]) -> RgbRaster {
    let (h, w) = (probabilities.height(), probabilities.width());
    let mut raster = RgbRaster::filled(w, h, [0.0; 3]);
    for y in 0..h {
        for x in 0..w {
            let rgb = [
                probabilities.get(picks[0].index(), y, x).clamp(0.0, 1.0),
                probabilities.get(picks[1].index(), y, x).clamp(0.0, 1.0),
                probabilities.get(picks[2].index(), y, x).clamp(0.0, 1.0),
            ];
            raster.set_pixel(x, y, rgb);
        }
    }
    raster
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '-'
            }
        })
        .collect()
}

pub fn report(args: ReportArgs, file: &FileConfig) -> Result<(), CliError> {
    let section = &file.report;
    let eval_path = require(args.eval.or_else(|| section.eval.clone()), "report", "eval")?;
    let overlay_out = require(
        args.overlay_out.or_else(|| section.overlay_out.clone()),
        "report",
        "overlay-out",
    )?;
    let channels = args
        .channels
        .or_else(|| section.channels.clone())
        .unwrap_or_else(|| "place-on,walk,grasp".to_string());
    let picks = parse_channels(&channels)?;

    let report: EvalReport = serde_json::from_str(
        &fs::read_to_string(&eval_path).map_err(at_file(&eval_path))?,
    )
    .map_err(at_file(&eval_path))?;

    fs::create_dir_all(&overlay_out).map_err(at_file(&overlay_out))?;
    for (index, sample) in report.samples.iter().enumerate() {
        let prediction_path = Path::new(&sample.prediction);
        let probabilities = load_tensor(prediction_path).map_err(at_file(prediction_path))?;
        let overlay = overlay_raster(&probabilities, &picks);
        let overlay_path =
            overlay_out.join(format!("{index:04}_{}.png", sanitize(&sample.source_id)));
        save_rgb_png(&overlay_path, &overlay).map_err(at_file(&overlay_path))?;
    }
    log::info!(
        "rendered {} overlays ({} as red, {} as green, {} as blue)",
        report.samples.len(),
        picks[0],
        picks[1],
        picks[2]
    );
    println!("{}", overlay_out.display());
    Ok(())
}
