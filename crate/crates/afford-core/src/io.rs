//! Binary formats for tensors, masks, part-label maps, and PNG rasters.
//!
//! All three custom formats share the same skeleton: a 4-byte ASCII magic,
//! a one-byte format version, little-endian u32 dimensions, then a raw
//! little-endian payload. Layouts:
//!
//! * tensor (`AFMT`): magic, version, affordance count, height, width,
//!   then `A*H*W` f32 values channel-major (17-byte header);
//! * mask (`AFMK`): magic, version, height, width, then `H*W` u8 values
//!   row-major, each 0 or 1 (13-byte header);
//! * part labels (`PLBL`): magic, version, height, width, then `H*W` u16
//!   indices row-major (13-byte header). The legend travels in a JSON
//!   sidecar mapping index to label path.
//!
//! Readers reject anything that violates a type invariant, reporting the
//! byte offset of the first problem, so a round-trip can never construct an
//! invalid value.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::CoreError;
use crate::raster::{PartLabelMap, RgbRaster};
use crate::tensor::{AffordanceTensor, CoverageMask};
use crate::vocabulary::AFFORDANCE_COUNT;

pub const TENSOR_MAGIC: [u8; 4] = *b"AFMT";
pub const MASK_MAGIC: [u8; 4] = *b"AFMK";
pub const LABELS_MAGIC: [u8; 4] = *b"PLBL";
pub const FORMAT_VERSION: u8 = 1;

struct Parser {
    buf: Vec<u8>,
    pos: usize,
}

impl Parser {
    fn from_source(mut source: impl Read) -> Result<Parser, CoreError> {
        let mut buf = Vec::new();
        source.read_to_end(&mut buf)?;
        Ok(Parser { buf, pos: 0 })
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&[u8], CoreError> {
        if self.pos + n > self.buf.len() {
            return Err(CoreError::format(
                self.pos as u64,
                format!(
                    "unexpected end of data reading {what}: expected {n} bytes, found {}",
                    self.buf.len() - self.pos
                ),
            ));
        }
        let slice = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn magic(&mut self, expected: [u8; 4]) -> Result<(), CoreError> {
        let found = self.take(4, "magic")?;
        if found != expected {
            return Err(CoreError::format(
                0,
                format!(
                    "bad magic: expected {:?}, found {:?}",
                    String::from_utf8_lossy(&expected),
                    String::from_utf8_lossy(found)
                ),
            ));
        }
        Ok(())
    }

    fn version(&mut self) -> Result<(), CoreError> {
        let offset = self.pos as u64;
        let v = self.take(1, "version")?[0];
        if v != FORMAT_VERSION {
            return Err(CoreError::format(
                offset,
                format!("unsupported format version {v}, expected {FORMAT_VERSION}"),
            ));
        }
        Ok(())
    }

    fn u32_le(&mut self, what: &str) -> Result<u32, CoreError> {
        let bytes = self.take(4, what)?;
        Ok(u32::from_le_bytes(bytes.try_into().unwrap()))
    }

    /// Checks that exactly `expected` payload bytes remain.
    fn payload(&mut self, expected: u64) -> Result<&[u8], CoreError> {
        let start = self.pos;
        let actual = (self.buf.len() - start) as u64;
        if actual < expected {
            return Err(CoreError::format(
                self.buf.len() as u64,
                format!("payload truncated: expected {expected} bytes, found {actual}"),
            ));
        }
        if actual > expected {
            return Err(CoreError::format(
                start as u64 + expected,
                format!("trailing data after payload: expected {expected} bytes, found {actual}"),
            ));
        }
        Ok(&self.buf[start..])
    }
}

fn checked_size(factors: &[u64], context: &str) -> Result<u64, CoreError> {
    let mut size: u64 = 1;
    for f in factors {
        size = size
            .checked_mul(*f)
            .ok_or_else(|| CoreError::format(0, format!("implausible {context} dimensions")))?;
    }
    Ok(size)
}

/// Writes a tensor in `AFMT` form, returning the number of bytes written.
pub fn write_tensor(tensor: &AffordanceTensor, sink: &mut impl Write) -> Result<u64, CoreError> {
    tensor.validate()?;
    sink.write_all(&TENSOR_MAGIC)?;
    sink.write_all(&[FORMAT_VERSION])?;
    sink.write_all(&(tensor.channels() as u32).to_le_bytes())?;
    sink.write_all(&(tensor.height() as u32).to_le_bytes())?;
    sink.write_all(&(tensor.width() as u32).to_le_bytes())?;
    for v in tensor.values() {
        sink.write_all(&v.to_le_bytes())?;
    }
    Ok(17 + 4 * tensor.values().len() as u64)
}

pub fn read_tensor(source: impl Read) -> Result<AffordanceTensor, CoreError> {
    let mut p = Parser::from_source(source)?;
    p.magic(TENSOR_MAGIC)?;
    p.version()?;
    let count_offset = p.pos as u64;
    let channels = p.u32_le("affordance count")?;
    if channels as usize != AFFORDANCE_COUNT {
        return Err(CoreError::format(
            count_offset,
            format!("affordance count {channels}, expected {AFFORDANCE_COUNT}"),
        ));
    }
    let height = p.u32_le("height")? as u64;
    let width = p.u32_le("width")? as u64;
    let expected = checked_size(&[channels as u64, height, width, 4], "tensor")?;
    let payload_start = p.pos as u64;
    let payload = p.payload(expected)?;
    let mut values = Vec::with_capacity((channels as u64 * height * width) as usize);
    for (i, chunk) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(CoreError::format(
                payload_start + 4 * i as u64,
                "non-finite tensor value".to_string(),
            ));
        }
        if !(0.0..=1.0).contains(&v) {
            return Err(CoreError::format(
                payload_start + 4 * i as u64,
                format!("tensor value {v} outside [0, 1]"),
            ));
        }
        values.push(v);
    }
    AffordanceTensor::from_values(height as usize, width as usize, values)
}

/// Writes a mask in `AFMK` form, returning the number of bytes written.
pub fn write_mask(mask: &CoverageMask, sink: &mut impl Write) -> Result<u64, CoreError> {
    mask.validate()?;
    sink.write_all(&MASK_MAGIC)?;
    sink.write_all(&[FORMAT_VERSION])?;
    sink.write_all(&(mask.height() as u32).to_le_bytes())?;
    sink.write_all(&(mask.width() as u32).to_le_bytes())?;
    sink.write_all(mask.values())?;
    Ok(13 + mask.values().len() as u64)
}

pub fn read_mask(source: impl Read) -> Result<CoverageMask, CoreError> {
    let mut p = Parser::from_source(source)?;
    p.magic(MASK_MAGIC)?;
    p.version()?;
    let height = p.u32_le("height")? as u64;
    let width = p.u32_le("width")? as u64;
    let expected = checked_size(&[height, width], "mask")?;
    let payload_start = p.pos as u64;
    let payload = p.payload(expected)?;
    for (i, v) in payload.iter().enumerate() {
        if *v > 1 {
            return Err(CoreError::format(
                payload_start + i as u64,
                format!("mask value {v} is not 0 or 1"),
            ));
        }
    }
    let values = payload.to_vec();
    CoverageMask::from_values(height as usize, width as usize, values)
}

/// Writes the index plane of a label map in `PLBL` form, returning the
/// number of bytes written. The legend goes in a separate JSON sidecar via
/// [`write_legend`].
pub fn write_label_map(map: &PartLabelMap, sink: &mut impl Write) -> Result<u64, CoreError> {
    sink.write_all(&LABELS_MAGIC)?;
    sink.write_all(&[FORMAT_VERSION])?;
    sink.write_all(&(map.height() as u32).to_le_bytes())?;
    sink.write_all(&(map.width() as u32).to_le_bytes())?;
    for index in map.indices() {
        sink.write_all(&index.to_le_bytes())?;
    }
    Ok(13 + 2 * map.indices().len() as u64)
}

/// Reads a `PLBL` index plane and joins it with its legend.
pub fn read_label_map(
    source: impl Read,
    legend: BTreeMap<u16, String>,
) -> Result<PartLabelMap, CoreError> {
    let mut p = Parser::from_source(source)?;
    p.magic(LABELS_MAGIC)?;
    p.version()?;
    let height = p.u32_le("height")? as u64;
    let width = p.u32_le("width")? as u64;
    let expected = checked_size(&[height, width, 2], "label map")?;
    let payload = p.payload(expected)?;
    let indices: Vec<u16> = payload
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes(c.try_into().unwrap()))
        .collect();
    PartLabelMap::new(width as usize, height as usize, indices, legend)
}

/// Writes a legend sidecar as JSON mapping index to label path.
pub fn write_legend(
    legend: &BTreeMap<u16, String>,
    sink: &mut impl Write,
) -> Result<(), CoreError> {
    serde_json::to_writer_pretty(&mut *sink, legend)
        .map_err(|e| CoreError::validation(format!("legend serialization failed: {e}")))?;
    sink.write_all(b"\n")?;
    Ok(())
}

pub fn read_legend(mut source: impl Read) -> Result<BTreeMap<u16, String>, CoreError> {
    let mut buf = String::new();
    source.read_to_string(&mut buf)?;
    serde_json::from_str(&buf).map_err(|e| CoreError::format(0, format!("legend is not valid JSON: {e}")))
}

/// Encodes a raster as an 8-bit RGB PNG; values map linearly onto 0..=255.
pub fn write_rgb_png(raster: &RgbRaster, sink: &mut impl Write) -> Result<(), CoreError> {
    let bytes: Vec<u8> = raster
        .data()
        .iter()
        .map(|v| (v * 255.0).round() as u8)
        .collect();
    use image::ImageEncoder as _;
    let encoder = image::codecs::png::PngEncoder::new(sink);
    encoder
        .write_image(
            &bytes,
            raster.width() as u32,
            raster.height() as u32,
            image::ColorType::Rgb8,
        )
        .map_err(|e| CoreError::format(0, format!("png encoding failed: {e}")))?;
    Ok(())
}

pub fn read_rgb_png(mut source: impl Read) -> Result<RgbRaster, CoreError> {
    let mut buf = Vec::new();
    source.read_to_end(&mut buf)?;
    let image = image::load_from_memory_with_format(&buf, image::ImageFormat::Png)
        .map_err(|e| CoreError::format(0, format!("png decoding failed: {e}")))?
        .to_rgb8();
    let (width, height) = image.dimensions();
    let data: Vec<f32> = image.into_raw().iter().map(|b| *b as f32 / 255.0).collect();
    RgbRaster::from_values(width as usize, height as usize, data)
}

/// Writes bytes to `path` through a sibling temp file and an atomic rename,
/// so a failed run never leaves a partial file at the destination.
pub fn write_file_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<(), CoreError> {
    let path = path.as_ref();
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn save_tensor(path: impl AsRef<Path>, tensor: &AffordanceTensor) -> Result<(), CoreError> {
    let mut buf = Vec::new();
    write_tensor(tensor, &mut buf)?;
    write_file_atomic(path, &buf)
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<AffordanceTensor, CoreError> {
    read_tensor(fs::File::open(path)?)
}

pub fn save_mask(path: impl AsRef<Path>, mask: &CoverageMask) -> Result<(), CoreError> {
    let mut buf = Vec::new();
    write_mask(mask, &mut buf)?;
    write_file_atomic(path, &buf)
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<CoverageMask, CoreError> {
    read_mask(fs::File::open(path)?)
}

pub fn save_label_map(path: impl AsRef<Path>, map: &PartLabelMap) -> Result<(), CoreError> {
    let mut buf = Vec::new();
    write_label_map(map, &mut buf)?;
    write_file_atomic(path, &buf)
}

pub fn load_label_map(
    path: impl AsRef<Path>,
    legend_path: impl AsRef<Path>,
) -> Result<PartLabelMap, CoreError> {
    let legend = read_legend(fs::File::open(legend_path)?)?;
    read_label_map(fs::File::open(path)?, legend)
}

pub fn save_legend(
    path: impl AsRef<Path>,
    legend: &BTreeMap<u16, String>,
) -> Result<(), CoreError> {
    let mut buf = Vec::new();
    write_legend(legend, &mut buf)?;
    write_file_atomic(path, &buf)
}

pub fn save_rgb_png(path: impl AsRef<Path>, raster: &RgbRaster) -> Result<(), CoreError> {
    let mut buf = Vec::new();
    write_rgb_png(raster, &mut buf)?;
    write_file_atomic(path, &buf)
}

pub fn load_rgb_png(path: impl AsRef<Path>) -> Result<RgbRaster, CoreError> {
    read_rgb_png(fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_tensor_is_257_bytes() {
        // 17-byte header plus 15*2*2 f32 values.
        let tensor = AffordanceTensor::zeros(2, 2);
        let mut buf = Vec::new();
        let written = write_tensor(&tensor, &mut buf).unwrap();
        assert_eq!(written, 257);
        assert_eq!(buf.len(), 257);
        assert_eq!(&buf[..4], b"AFMT");
        assert_eq!(buf[4], 1);
        assert_eq!(u32::from_le_bytes(buf[5..9].try_into().unwrap()), 15);
    }

    #[test]
    fn bad_magic_is_rejected_at_offset_zero() {
        let err = read_tensor(&b"XXXX\x01"[..]).unwrap_err();
        match err {
            CoreError::Format { offset, .. } => assert_eq!(offset, 0),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_payload_reports_expected_and_actual() {
        let tensor = AffordanceTensor::zeros(2, 2);
        let mut buf = Vec::new();
        write_tensor(&tensor, &mut buf).unwrap();
        buf.truncate(buf.len() - 1);
        let err = read_tensor(&buf[..]).unwrap_err();
        let message = err.to_string();
        assert!(message.contains("expected 240"), "{message}");
        assert!(message.contains("found 239"), "{message}");
    }

    #[test]
    fn out_of_range_tensor_value_fails_write() {
        let mut tensor = AffordanceTensor::zeros(2, 2);
        tensor.values_mut()[0] = 1.5;
        let mut buf = Vec::new();
        let err = write_tensor(&tensor, &mut buf).unwrap_err();
        assert!(matches!(err, CoreError::Validation(_)));
    }

    #[test]
    fn out_of_range_tensor_value_fails_read_with_offset() {
        let tensor = AffordanceTensor::zeros(2, 2);
        let mut buf = Vec::new();
        write_tensor(&tensor, &mut buf).unwrap();
        // Patch the third payload value to 2.0.
        buf[17 + 8..17 + 12].copy_from_slice(&2.0f32.to_le_bytes());
        let err = read_tensor(&buf[..]).unwrap_err();
        match err {
            CoreError::Format { offset, .. } => assert_eq!(offset, 25),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn all_valid_mask_payload_is_ones() {
        let mask = CoverageMask::all_valid(2, 2);
        let mut buf = Vec::new();
        let written = write_mask(&mask, &mut buf).unwrap();
        assert_eq!(written, 17);
        assert_eq!(&buf[13..], &[1, 1, 1, 1]);
    }

    #[test]
    fn mask_payload_byte_two_is_rejected() {
        let mask = CoverageMask::all_valid(2, 2);
        let mut buf = Vec::new();
        write_mask(&mask, &mut buf).unwrap();
        buf[14] = 2;
        let err = read_mask(&buf[..]).unwrap_err();
        match err {
            CoreError::Format { offset, message } => {
                assert_eq!(offset, 14);
                assert!(message.contains("not 0 or 1"), "{message}");
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_affordance_count_is_rejected() {
        let tensor = AffordanceTensor::zeros(1, 1);
        let mut buf = Vec::new();
        write_tensor(&tensor, &mut buf).unwrap();
        buf[5..9].copy_from_slice(&14u32.to_le_bytes());
        let err = read_tensor(&buf[..]).unwrap_err();
        assert!(err.to_string().contains("affordance count 14"));
    }
}
