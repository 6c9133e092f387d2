//! Pure rasterization of a `SceneSpec` into an RGB image and a per-pixel
//! part-label map, plus the affordance pass that turns the labels into a
//! supervision target through a transfer table.
//!
//! Rendering draws no randomness: texture noise comes from a hash
//! lattice keyed by the scene seed, so the same spec always produces the
//! same bytes.

use afford_core::{PartLabelMap, RgbRaster};
use afford_mapgen::Sample;
use afford_transfer::TransferTable;

use crate::catalog::{catalog_legend, label_index, CATALOG_LABELS};
use crate::scene::{SceneSpec, ROOM_WIDTH, WORLD_WIDTH};
use crate::SimError;

/// Smallest render size; below this the fixed camera can no longer place
/// a pixel center in every background region.
pub const MIN_RENDER_SIDE: usize = 32;

/// Texture cells per world unit for the hash-lattice noise.
const NOISE_FREQUENCY: f32 = 24.0;

/// Viewport of the camera in world units: `(cx, cy, v_w, v_h)`.
///
/// The height is chosen so the wall/floor horizon is always strictly
/// inside the view, and the center is clamped so the room interior
/// (x < 2) always contributes pixels. Both properties together guarantee
/// wall and floor appear in every render.
fn viewport(spec: &SceneSpec, width: usize, height: usize) -> (f32, f32, f32, f32) {
    let cam = spec.camera;
    let aspect = width as f32 / height as f32;
    let v_h = (0.92 / cam.zoom).min(1.0);
    let v_w = (v_h * aspect).min(2.9);
    let cx_lo = v_w / 2.0;
    let cx_hi = cx_lo.max(ROOM_WIDTH.min(WORLD_WIDTH - v_w / 2.0));
    let cx = (cx_lo + (cx_hi - cx_lo) * cam.trajectory_t + cam.position_jitter[0])
        .clamp(cx_lo, cx_hi);
    let cy = (0.5 + cam.position_jitter[1]).clamp(v_h / 2.0, 1.0 - v_h / 2.0);
    (cx, cy, v_w, v_h)
}

fn hash2(ix: i32, iy: i32, salt: u32) -> f32 {
    let mut h = (ix as u32)
        .wrapping_mul(0x9E37_79B1)
        ^ (iy as u32).wrapping_mul(0x85EB_CA77)
        ^ salt.wrapping_mul(0xC2B2_AE3D);
    h ^= h >> 16;
    h = h.wrapping_mul(0x7FEB_352D);
    h ^= h >> 15;
    h = h.wrapping_mul(0x846C_A68B);
    h ^= h >> 16;
    (h >> 8) as f32 / (1u32 << 24) as f32
}

/// Smooth value noise in [0, 1): bilinear blend of lattice hashes with a
/// smoothstep fade.
fn value_noise(wx: f32, wy: f32, salt: u32) -> f32 {
    let fx = wx * NOISE_FREQUENCY;
    let fy = wy * NOISE_FREQUENCY;
    let ix = fx.floor();
    let iy = fy.floor();
    let tx = fx - ix;
    let ty = fy - iy;
    let sx = tx * tx * (3.0 - 2.0 * tx);
    let sy = ty * ty * (3.0 - 2.0 * ty);
    let (i, j) = (ix as i32, iy as i32);
    let a = hash2(i, j, salt);
    let b = hash2(i + 1, j, salt);
    let c = hash2(i, j + 1, salt);
    let d = hash2(i + 1, j + 1, salt);
    let top = a + (b - a) * sx;
    let bottom = c + (d - c) * sx;
    top + (bottom - top) * sy
}

fn object_salt(seed: u64, object_index: usize) -> u32 {
    (seed as u32) ^ ((seed >> 32) as u32) ^ (object_index as u32).wrapping_mul(0x0100_0193)
}

/// Renders the image and the part-label map for one spec.
///
/// The label map's legend always lists the full catalog, so downstream
/// label-to-affordance resolution sees every path the generator can emit
/// regardless of which objects this particular scene contains.
pub fn render_scene(
    spec: &SceneSpec,
    width: usize,
    height: usize,
) -> Result<(RgbRaster, PartLabelMap), SimError> {
    if width < MIN_RENDER_SIDE || height < MIN_RENDER_SIDE {
        return Err(SimError::argument(format!(
            "render size {width}x{height} too small, minimum is {MIN_RENDER_SIDE}x{MIN_RENDER_SIDE}"
        )));
    }

    let (cx, cy, v_w, v_h) = viewport(spec, width, height);
    let x_left = cx - v_w / 2.0;
    let y_top = cy - v_h / 2.0;

    // Painter's order: by depth layer, then declaration order. The sort
    // is stable so layer ties keep the sampler's sequence.
    let mut order: Vec<usize> = (0..spec.objects.len()).collect();
    order.sort_by_key(|&i| spec.objects[i].depth_layer);

    let illum = spec.illumination;
    let base_gain = 0.30
        + 0.28 * illum.indoor_intensity
        + 0.22 * illum.outdoor_intensity
        + 0.25 * illum.day_factor;

    let mut image = RgbRaster::filled(width, height, [0.0, 0.0, 0.0]);
    let mut indices = vec![0u16; width * height];

    for py in 0..height {
        let wy = y_top + (py as f32 + 0.5) / height as f32 * v_h;
        let gain = base_gain * (1.10 - 0.20 * wy);
        for px in 0..width {
            let wx = x_left + (px as f32 + 0.5) / width as f32 * v_w;

            let mut hit: Option<(usize, usize)> = None;
            for &oi in &order {
                for (pi, part) in spec.objects[oi].parts.iter().enumerate() {
                    if part.shape.contains(wx, wy) {
                        hit = Some((oi, pi));
                    }
                }
            }
            // The background tiles the world, so every pixel hits.
            let (oi, pi) = hit.expect("world tiling covers every pixel");
            let object = &spec.objects[oi];
            let part = &object.parts[pi];

            let amplitude = object.material.noise_amplitude;
            let noise = value_noise(wx, wy, object_salt(spec.seed, oi));
            let mut rgb = part.color;
            for c in &mut rgb {
                *c *= 1.0 + amplitude * (2.0 * noise - 1.0);
            }
            if object.material.gloss > 0.0 {
                let (_, y0, _, y1) = part.shape.bounds();
                let band = (1.0 - (wy - y0) / (0.25 * (y1 - y0))).clamp(0.0, 1.0);
                let highlight = object.material.gloss * 0.35 * band;
                for c in &mut rgb {
                    *c += highlight;
                }
            }
            for c in &mut rgb {
                *c = (*c * gain).clamp(0.0, 1.0);
            }
            image.set_pixel(px, py, rgb);

            indices[py * width + px] =
                label_index(&part.label).expect("sampler emits only catalog labels");
        }
    }

    let labels = PartLabelMap::new(width, height, indices, catalog_legend())?;
    Ok((image, labels))
}

/// Renders a scene and pairs the image with its affordance target.
///
/// Fails up front if the table cannot resolve every catalog label: a
/// table with holes would silently produce invalid pixels, and the
/// generator's whole point is full coverage (the returned mask is
/// all-ones).
pub fn render_affordance_pass(
    spec: &SceneSpec,
    width: usize,
    height: usize,
    table: &TransferTable,
) -> Result<Sample, SimError> {
    for path in CATALOG_LABELS {
        if table.resolve(path).is_none() {
            return Err(SimError::Config(format!(
                "transfer table does not cover catalog label {path:?}"
            )));
        }
    }
    let (image, labels) = render_scene(spec, width, height)?;
    let (target, mask) = table.resolve_map(&labels);
    debug_assert_eq!(mask.count_valid(), width * height);
    let source_id = format!("scene-{}-{:016x}", spec.room_kind, spec.seed);
    Ok(Sample::new(image, target, mask, source_id)?)
}
