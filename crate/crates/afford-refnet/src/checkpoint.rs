//! Parameter checkpoints: magic "AFPW" | version u8 = 1 | u32 LE JSON
//! header length | JSON header | raw f64 LE payloads. The header pins
//! the model config, the affordance vocabulary, and per-layer byte
//! ranges into the payload; the vocabulary check is what keeps channel
//! indices meaningful across save/load.

use std::path::Path;

use afford_core::io::write_file_atomic;
use afford_core::AFFORDANCE_NAMES;
use serde::{Deserialize, Serialize};

use crate::layers::ConvKernel;
use crate::model::{layer_shapes, ModelConfig, ModelParams};
use crate::train::EpochRecord;
use crate::RefnetError;

const MAGIC: [u8; 4] = *b"AFPW";
const VERSION: u8 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct LayerHeader {
    name: String,
    out_channels: usize,
    in_channels: usize,
    kernel: usize,
    /// Byte ranges into the payload region.
    weight_offset: u64,
    weight_bytes: u64,
    bias_offset: u64,
    bias_bytes: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointHeader {
    config: ModelConfig,
    affordances: Vec<String>,
    layers: Vec<LayerHeader>,
}

fn format_error(offset: u64, message: impl Into<String>) -> RefnetError {
    RefnetError::Format {
        offset,
        message: message.into(),
    }
}

pub fn save_checkpoint(
    path: impl AsRef<Path>,
    config: &ModelConfig,
    params: &ModelParams,
) -> Result<(), RefnetError> {
    params.validate_against(config)?;

    let mut layers = Vec::new();
    let mut payload = Vec::<u8>::new();
    for (layer, (name, ..)) in params.layers().zip(layer_shapes(config)) {
        let weight_offset = payload.len() as u64;
        for v in &layer.weight {
            payload.extend_from_slice(&v.to_le_bytes());
        }
        let bias_offset = payload.len() as u64;
        for v in &layer.bias {
            payload.extend_from_slice(&v.to_le_bytes());
        }
        layers.push(LayerHeader {
            name,
            out_channels: layer.out_channels,
            in_channels: layer.in_channels,
            kernel: layer.kernel,
            weight_offset,
            weight_bytes: 8 * layer.weight.len() as u64,
            bias_offset,
            bias_bytes: 8 * layer.bias.len() as u64,
        });
    }
    let header = CheckpointHeader {
        config: *config,
        affordances: AFFORDANCE_NAMES.iter().map(|n| n.to_string()).collect(),
        layers,
    };
    let header_json = serde_json::to_vec(&header)?;

    let mut bytes = Vec::with_capacity(9 + header_json.len() + payload.len());
    bytes.extend_from_slice(&MAGIC);
    bytes.push(VERSION);
    bytes.extend_from_slice(&(header_json.len() as u32).to_le_bytes());
    bytes.extend_from_slice(&header_json);
    bytes.extend_from_slice(&payload);
    write_file_atomic(path, &bytes)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(ModelConfig, ModelParams), RefnetError> {
    let bytes = std::fs::read(path.as_ref())?;
    if bytes.len() < 9 {
        return Err(format_error(
            bytes.len() as u64,
            "file too short for checkpoint preamble",
        ));
    }
    if bytes[0..4] != MAGIC {
        return Err(format_error(0, "bad magic, expected \"AFPW\""));
    }
    if bytes[4] != VERSION {
        return Err(format_error(4, format!("unsupported version {}", bytes[4])));
    }
    let header_len = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let payload_start = 9 + header_len;
    if bytes.len() < payload_start {
        return Err(format_error(
            9,
            format!(
                "header length {header_len} overruns the file ({} bytes)",
                bytes.len()
            ),
        ));
    }
    let header: CheckpointHeader = serde_json::from_slice(&bytes[9..payload_start])
        .map_err(|e| format_error(9, format!("header does not parse: {e}")))?;

    if header.affordances != AFFORDANCE_NAMES {
        return Err(format_error(
            9,
            "checkpoint affordance vocabulary does not match this build",
        ));
    }
    header.config.validate()?;
    let expected = layer_shapes(&header.config);
    if header.layers.len() != expected.len() {
        return Err(format_error(
            9,
            format!(
                "checkpoint lists {} layers, config prescribes {}",
                header.layers.len(),
                expected.len()
            ),
        ));
    }

    let payload = &bytes[payload_start..];
    let mut consumed = 0u64;
    let mut kernels = Vec::with_capacity(expected.len());
    for (layer, (name, out_ch, in_ch, k)) in header.layers.iter().zip(&expected) {
        if layer.name != *name
            || layer.out_channels != *out_ch
            || layer.in_channels != *in_ch
            || layer.kernel != *k
        {
            return Err(format_error(
                9,
                format!(
                    "layer {} has shape {}x{}x{}, config prescribes {name} as {out_ch}x{in_ch}x{k}",
                    layer.name, layer.out_channels, layer.in_channels, layer.kernel
                ),
            ));
        }
        let weight_count = out_ch * in_ch * k * k;
        if layer.weight_bytes != 8 * weight_count as u64
            || layer.bias_bytes != 8 * *out_ch as u64
        {
            return Err(format_error(
                9,
                format!("layer {name} declares wrong payload sizes"),
            ));
        }
        let read_f64s = |offset: u64, byte_len: u64| -> Result<Vec<f64>, RefnetError> {
            let start = offset as usize;
            let end = start + byte_len as usize;
            if end > payload.len() {
                return Err(format_error(
                    (payload_start as u64) + offset,
                    format!("layer {name} payload extends past end of file"),
                ));
            }
            let values: Vec<f64> = payload[start..end]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            if values.iter().any(|v| !v.is_finite()) {
                return Err(format_error(
                    (payload_start as u64) + offset,
                    format!("layer {name} contains non-finite values"),
                ));
            }
            Ok(values)
        };
        let weight = read_f64s(layer.weight_offset, layer.weight_bytes)?;
        let bias = read_f64s(layer.bias_offset, layer.bias_bytes)?;
        consumed += layer.weight_bytes + layer.bias_bytes;
        kernels.push(ConvKernel {
            out_channels: *out_ch,
            in_channels: *in_ch,
            kernel: *k,
            weight,
            bias,
        });
    }
    if consumed != payload.len() as u64 {
        return Err(format_error(
            payload_start as u64,
            format!(
                "payload is {} bytes but layers account for {consumed}",
                payload.len()
            ),
        ));
    }

    let head = kernels.pop().expect("layer list includes the head");
    let decoder = kernels.split_off(header.config.depth);
    let params = ModelParams {
        encoder: kernels,
        decoder,
        head,
        revision: 0,
    };
    params.validate_against(&header.config)?;
    Ok((header.config, params))
}

/// History sidecar: a JSON array of per-epoch records.
pub fn save_history(path: impl AsRef<Path>, history: &[EpochRecord]) -> Result<(), RefnetError> {
    let mut json = serde_json::to_vec_pretty(history)?;
    json.push(b'\n');
    write_file_atomic(path, &json)?;
    Ok(())
}

pub fn load_history(path: impl AsRef<Path>) -> Result<Vec<EpochRecord>, RefnetError> {
    Ok(serde_json::from_slice(&std::fs::read(path.as_ref())?)?)
}
