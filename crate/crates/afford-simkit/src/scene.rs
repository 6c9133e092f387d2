//! Scene specification types and the probabilistic sampler that fills
//! them.
//!
//! World coordinates: x in [0, 3], y in [0, 1] (y grows downward). The
//! room interior spans x in [0, 2]; the strip beyond x = 2 is an opening
//! onto the outside, split into "void" above the horizon and "road"
//! below. The wall/floor boundary sits at y = `HORIZON`. Together the
//! four background parts tile the whole world rectangle, which is what
//! makes every rendered pixel carry a label.
//!
//! `sample_scene` performs all randomization; rendering a spec is pure.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{material_set, Material, ObjectKind};

pub const WORLD_WIDTH: f32 = 3.0;
pub const WORLD_HEIGHT: f32 = 1.0;
pub const ROOM_WIDTH: f32 = 2.0;
/// Wall/floor boundary height.
pub const HORIZON: f32 = 0.72;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Rect {
        x: f32,
        y: f32,
        w: f32,
        h: f32,
    },
    RoundedRect {
        x: f32,
        y: f32,
        w: f32,
        h: f32,
        radius: f32,
    },
    Ellipse {
        cx: f32,
        cy: f32,
        rx: f32,
        ry: f32,
    },
}

impl Shape {
    /// Point-in-shape test. Rectangles are half-open so adjacent shapes
    /// tile without gaps or double coverage.
    pub fn contains(&self, wx: f32, wy: f32) -> bool {
        match *self {
            Shape::Rect { x, y, w, h } => wx >= x && wx < x + w && wy >= y && wy < y + h,
            Shape::RoundedRect { x, y, w, h, radius } => {
                if !(wx >= x && wx < x + w && wy >= y && wy < y + h) {
                    return false;
                }
                let r = radius.min(w / 2.0).min(h / 2.0);
                if r <= 0.0 {
                    return true;
                }
                // Distance check against the four corner circles.
                let cx = wx.clamp(x + r, x + w - r);
                let cy = wy.clamp(y + r, y + h - r);
                let (dx, dy) = (wx - cx, wy - cy);
                dx * dx + dy * dy <= r * r
            }
            Shape::Ellipse { cx, cy, rx, ry } => {
                let (dx, dy) = ((wx - cx) / rx, (wy - cy) / ry);
                dx * dx + dy * dy <= 1.0
            }
        }
    }

    /// Axis-aligned bounds as (x0, y0, x1, y1).
    pub fn bounds(&self) -> (f32, f32, f32, f32) {
        match *self {
            Shape::Rect { x, y, w, h } | Shape::RoundedRect { x, y, w, h, .. } => {
                (x, y, x + w, y + h)
            }
            Shape::Ellipse { cx, cy, rx, ry } => (cx - rx, cy - ry, cx + rx, cy + ry),
        }
    }
}

/// One labeled region of an object, with its resolved flat color.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Part {
    pub label: String,
    pub shape: Shape,
    pub color: [f32; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub kind: ObjectKind,
    pub material: Material,
    pub anchor: [f32; 2],
    pub depth_layer: u8,
    pub shape_t: f32,
    pub parts: Vec<Part>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Illumination {
    pub outdoor_intensity: f32,
    pub indoor_intensity: f32,
    pub day_factor: f32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    /// Position along the fixed pan path through the room, in [0, 1].
    pub trajectory_t: f32,
    pub position_jitter: [f32; 2],
    pub zoom: f32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoomKind {
    LivingRoom,
    Kitchen,
}

impl std::fmt::Display for RoomKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RoomKind::LivingRoom => "living_room",
            RoomKind::Kitchen => "kitchen",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub seed: u64,
    pub room_kind: RoomKind,
    pub objects: Vec<ObjectInstance>,
    pub illumination: Illumination,
    pub camera: Camera,
}

fn scaled(base: [f32; 3], scale: [f32; 3]) -> [f32; 3] {
    [
        (base[0] * scale[0]).clamp(0.0, 1.0),
        (base[1] * scale[1]).clamp(0.0, 1.0),
        (base[2] * scale[2]).clamp(0.0, 1.0),
    ]
}

fn pick_material(rng: &mut ChaCha8Rng, kind: ObjectKind) -> Material {
    let set = material_set(kind);
    set[rng.gen_range(0..set.len())].to_material()
}

fn lerp(a: f32, b: f32, t: f32) -> f32 {
    a + (b - a) * t
}

/// Per-room presence probabilities, in the fixed object draw order.
struct RoomProfile {
    rug: f64,
    fireplace: f64,
    door: f64,
    window: f64,
    display: f64,
    button_panel: f64,
    towel: f64,
    table: f64,
    chair: f64,
    lamp: f64,
    pot: f64,
    plate: f64,
    cutlery: f64,
    vase: f64,
}

fn profile(room: RoomKind) -> RoomProfile {
    match room {
        RoomKind::Kitchen => RoomProfile {
            rug: 0.25,
            fireplace: 0.0,
            door: 0.55,
            window: 0.65,
            display: 0.12,
            button_panel: 0.5,
            towel: 0.65,
            table: 1.0,
            chair: 0.55,
            lamp: 0.35,
            pot: 1.0,
            plate: 0.75,
            cutlery: 0.7,
            vase: 0.2,
        },
        RoomKind::LivingRoom => RoomProfile {
            rug: 0.7,
            fireplace: 0.5,
            door: 0.5,
            window: 0.7,
            display: 0.55,
            button_panel: 0.3,
            towel: 0.0,
            table: 0.65,
            chair: 0.8,
            lamp: 0.7,
            pot: 0.0,
            plate: 0.3,
            cutlery: 0.5,
            vase: 0.45,
        },
    }
}

/// X interval of the table top, used to keep free-standing furniture out
/// of the table's column so dependent placements stay un-occluded.
#[derive(Clone, Copy)]
struct TableTop {
    x: f32,
    y: f32,
    w: f32,
    h: f32,
}

/// Picks an x position of width `item_w` inside the room but outside the
/// table's column, preferring one side by coin flip. Returns None when
/// neither side has room.
fn place_beside(
    rng: &mut ChaCha8Rng,
    table: Option<TableTop>,
    item_w: f32,
) -> Option<f32> {
    const LO: f32 = 0.12;
    const HI: f32 = 1.88;
    let prefer_right = rng.gen_bool(0.5);
    match table {
        None => Some(rng.gen_range(LO..=HI - item_w)),
        Some(top) => {
            let left = (LO, top.x - 0.03 - item_w);
            let right = (top.x + top.w + 0.03, HI - item_w);
            let order = if prefer_right {
                [right, left]
            } else {
                [left, right]
            };
            for (lo, hi) in order {
                if hi >= lo {
                    return Some(rng.gen_range(lo..=hi));
                }
            }
            None
        }
    }
}

/// Draws a complete scene. All randomness happens here, in a fixed
/// order, so one seed always produces one spec and rendering stays pure.
pub fn sample_scene(seed: u64, room_kind: RoomKind) -> SceneSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let day_factor = rng.gen_range(0.0f32..=1.0);
    let illumination = Illumination {
        outdoor_intensity: 0.3 + 0.7 * day_factor,
        indoor_intensity: rng.gen_range(0.55f32..=0.95),
        day_factor,
    };
    let camera = Camera {
        trajectory_t: rng.gen_range(0.0f32..=1.0),
        position_jitter: [
            rng.gen_range(-0.08f32..=0.08),
            rng.gen_range(-0.08f32..=0.08),
        ],
        zoom: rng.gen_range(0.85f32..=1.25),
    };

    let mut objects = Vec::new();

    // Background: the four parts tile the world rectangle exactly.
    let wall_mat = pick_material(&mut rng, ObjectKind::Wall);
    objects.push(ObjectInstance {
        kind: ObjectKind::Wall,
        anchor: [0.0, 0.0],
        depth_layer: 0,
        shape_t: 0.0,
        parts: vec![Part {
            label: "wall".into(),
            shape: Shape::Rect {
                x: 0.0,
                y: 0.0,
                w: ROOM_WIDTH,
                h: HORIZON,
            },
            color: wall_mat.base_color,
        }],
        material: wall_mat,
    });
    let floor_mat = pick_material(&mut rng, ObjectKind::Floor);
    objects.push(ObjectInstance {
        kind: ObjectKind::Floor,
        anchor: [0.0, HORIZON],
        depth_layer: 0,
        shape_t: 0.0,
        parts: vec![Part {
            label: "floor".into(),
            shape: Shape::Rect {
                x: 0.0,
                y: HORIZON,
                w: ROOM_WIDTH,
                h: WORLD_HEIGHT - HORIZON,
            },
            color: floor_mat.base_color,
        }],
        material: floor_mat,
    });
    let outside_mat = pick_material(&mut rng, ObjectKind::RoadVoid);
    objects.push(ObjectInstance {
        kind: ObjectKind::RoadVoid,
        anchor: [ROOM_WIDTH, 0.0],
        depth_layer: 0,
        shape_t: 0.0,
        parts: vec![
            Part {
                label: "void".into(),
                shape: Shape::Rect {
                    x: ROOM_WIDTH,
                    y: 0.0,
                    w: WORLD_WIDTH - ROOM_WIDTH,
                    h: HORIZON,
                },
                color: scaled(outside_mat.base_color, [0.92, 0.98, 1.18]),
            },
            Part {
                label: "road".into(),
                shape: Shape::Rect {
                    x: ROOM_WIDTH,
                    y: HORIZON,
                    w: WORLD_WIDTH - ROOM_WIDTH,
                    h: WORLD_HEIGHT - HORIZON,
                },
                color: scaled(outside_mat.base_color, [0.55, 0.53, 0.50]),
            },
        ],
        material: outside_mat,
    });

    let p = profile(room_kind);

    // Presence coins are drawn unconditionally so the decision stream has
    // the same shape regardless of what ends up in the scene.
    if rng.gen_bool(p.rug) {
        let mat = pick_material(&mut rng, ObjectKind::Rug);
        let shape_t = rng.gen_range(0.0f32..=1.0);
        let w = rng.gen_range(0.6f32..=1.0);
        let cx = rng.gen_range(0.15 + w / 2.0..=1.85 - w / 2.0);
        let h = rng.gen_range(0.07f32..=0.14);
        let y = rng.gen_range(HORIZON + 0.03..=0.97 - h);
        objects.push(ObjectInstance {
            kind: ObjectKind::Rug,
            anchor: [cx, y],
            depth_layer: 1,
            shape_t,
            parts: vec![Part {
                label: "rug".into(),
                shape: Shape::RoundedRect {
                    x: cx - w / 2.0,
                    y,
                    w,
                    h,
                    radius: shape_t * h / 2.0,
                },
                color: mat.base_color,
            }],
            material: mat,
        });
    }

    if rng.gen_bool(p.fireplace) {
        let mat = pick_material(&mut rng, ObjectKind::Fireplace);
        let shape_t = rng.gen_range(0.0f32..=1.0);
        let w = rng.gen_range(0.30f32..=0.42);
        let x = rng.gen_range(0.55f32..=1.10);
        let h_up = rng.gen_range(0.16f32..=0.22);
        objects.push(ObjectInstance {
            kind: ObjectKind::Fireplace,
            anchor: [x, HORIZON - h_up],
            depth_layer: 1,
            shape_t,
            parts: vec![Part {
                label: "fireplace".into(),
                shape: Shape::RoundedRect {
                    x,
                    y: HORIZON - h_up,
                    w,
                    h: h_up + 0.05,
                    radius: shape_t * 0.06,
                },
                color: mat.base_color,
            }],
            material: mat,
        });
    }

    if rng.gen_bool(p.door) {
        let mat = pick_material(&mut rng, ObjectKind::Door);
        let shape_t = rng.gen_range(0.0f32..=1.0);
        let w = rng.gen_range(0.22f32..=0.30);
        let x = rng.gen_range(0.08f32..=0.35);
        let hd = rng.gen_range(0.50f32..=0.62);
        let handle_y = HORIZON - hd * 0.45;
        objects.push(ObjectInstance {
            kind: ObjectKind::Door,
            anchor: [x, HORIZON - hd],
            depth_layer: 1,
            shape_t,
            parts: vec![
                Part {
                    label: "door/panel".into(),
                    shape: Shape::RoundedRect {
                        x,
                        y: HORIZON - hd,
                        w,
                        h: hd,
                        radius: shape_t * 0.04,
                    },
                    color: mat.base_color,
                },
                Part {
                    label: "door/handle".into(),
                    shape: Shape::Rect {
                        x: x + 0.78 * w,
                        y: handle_y,
                        w: 0.05,
                        h: 0.014,
                    },
                    color: scaled(mat.base_color, [0.70, 0.75, 0.85]),
                },
                Part {
                    label: "door/knob".into(),
                    shape: Shape::Ellipse {
                        cx: x + 0.84 * w,
                        cy: handle_y + 0.05,
                        rx: 0.02,
                        ry: 0.02,
                    },
                    color: scaled(mat.base_color, [1.05, 0.92, 0.60]),
                },
            ],
            material: mat,
        });
    }

    if rng.gen_bool(p.window) {
        let mat = pick_material(&mut rng, ObjectKind::Window);
        let shape_t = rng.gen_range(0.0f32..=1.0);
        let w = rng.gen_range(0.25f32..=0.35);
        let x = rng.gen_range(1.20f32..=1.60);
        let y0 = rng.gen_range(0.16f32..=0.26);
        let h = rng.gen_range(0.24f32..=0.34);
        objects.push(ObjectInstance {
            kind: ObjectKind::Window,
            anchor: [x, y0],
            depth_layer: 1,
            shape_t,
            parts: vec![Part {
                label: "window".into(),
                shape: Shape::RoundedRect {
                    x,
                    y: y0,
                    w,
                    h,
                    radius: shape_t * 0.03,
                },
                color: mat.base_color,
            }],
            material: mat,
        });
    }

    if rng.gen_bool(p.display) {
        let mat = pick_material(&mut rng, ObjectKind::Display);
        let shape_t = rng.gen_range(0.0f32..=1.0);
        let w = rng.gen_range(0.20f32..=0.30);
        let x = rng.gen_range(0.85f32..=1.20);
        let y0 = rng.gen_range(0.30f32..=0.42);
        let h = rng.gen_range(0.12f32..=0.18);
        objects.push(ObjectInstance {
            kind: ObjectKind::Display,
            anchor: [x, y0],
            depth_layer: 1,
            shape_t,
            parts: vec![Part {
                label: "display".into(),
                shape: Shape::RoundedRect {
                    x,
                    y: y0,
                    w,
                    h,
                    radius: shape_t * 0.012,
                },
                color: mat.base_color,
            }],
            material: mat,
        });
    }

    if rng.gen_bool(p.button_panel) {
        let mat = pick_material(&mut rng, ObjectKind::ButtonPanel);
        let shape_t = rng.gen_range(0.0f32..=1.0);
        let x = rng.gen_range(0.42f32..=0.58);
        let y = rng.gen_range(0.40f32..=0.48);
        objects.push(ObjectInstance {
            kind: ObjectKind::ButtonPanel,
            anchor: [x, y],
            depth_layer: 1,
            shape_t,
            parts: vec![Part {
                label: "button-panel".into(),
                shape: Shape::Rect {
                    x,
                    y,
                    w: 0.028,
                    h: 0.042,
                },
                color: mat.base_color,
            }],
            material: mat,
        });
    }

    if rng.gen_bool(p.towel) {
        let mat = pick_material(&mut rng, ObjectKind::Towel);
        let shape_t = rng.gen_range(0.0f32..=1.0);
        let x = rng.gen_range(0.50f32..=0.80);
        let y = rng.gen_range(0.45f32..=0.55);
        let w = rng.gen_range(0.06f32..=0.10);
        let h = rng.gen_range(0.12f32..=0.16);
        objects.push(ObjectInstance {
            kind: ObjectKind::Towel,
            anchor: [x, y],
            depth_layer: 1,
            shape_t,
            parts: vec![Part {
                label: "towel".into(),
                shape: Shape::Rect { x, y, w, h },
                color: mat.base_color,
            }],
            material: mat,
        });
    }

    let mut table_top: Option<TableTop> = None;
    if rng.gen_bool(p.table) {
        let mat = pick_material(&mut rng, ObjectKind::Table);
        let shape_t = rng.gen_range(0.0f32..=1.0);
        let w = rng.gen_range(0.50f32..=0.80);
        let cx = rng.gen_range(0.15 + w / 2.0..=1.85 - w / 2.0);
        let y0 = rng.gen_range(0.75f32..=0.80);
        let th = rng.gen_range(0.045f32..=0.07);
        let ll = rng.gen_range(0.10f32..=0.16).min(0.98 - y0 - th);
        let x0 = cx - w / 2.0;
        let top = TableTop {
            x: x0,
            y: y0,
            w,
            h: th,
        };
        objects.push(ObjectInstance {
            kind: ObjectKind::Table,
            anchor: [cx, y0],
            depth_layer: 2,
            shape_t,
            parts: vec![
                Part {
                    label: "table/top".into(),
                    shape: Shape::RoundedRect {
                        x: x0,
                        y: y0,
                        w,
                        h: th,
                        radius: shape_t * th / 2.0,
                    },
                    color: mat.base_color,
                },
                Part {
                    label: "table/legs".into(),
                    shape: Shape::Rect {
                        x: x0 + 0.03,
                        y: y0 + th,
                        w: 0.035,
                        h: ll,
                    },
                    color: scaled(mat.base_color, [0.72, 0.72, 0.72]),
                },
                Part {
                    label: "table/legs".into(),
                    shape: Shape::Rect {
                        x: x0 + w - 0.065,
                        y: y0 + th,
                        w: 0.035,
                        h: ll,
                    },
                    color: scaled(mat.base_color, [0.72, 0.72, 0.72]),
                },
            ],
            material: mat,
        });
        table_top = Some(top);
    }

    if rng.gen_bool(p.chair) {
        let mat = pick_material(&mut rng, ObjectKind::Chair);
        let shape_t = rng.gen_range(0.0f32..=1.0);
        let w = rng.gen_range(0.16f32..=0.22);
        if let Some(x) = place_beside(&mut rng, table_top, w) {
            let y0 = rng.gen_range(0.78f32..=0.83);
            let sh = rng.gen_range(0.030f32..=0.045);
            let bh = rng.gen_range(0.10f32..=0.16);
            let ll = rng.gen_range(0.07f32..=0.11).min(0.98 - y0 - sh);
            let backrest_left = rng.gen_bool(0.5);
            let bw = 0.22 * w;
            let bx = if backrest_left { x } else { x + w - bw };
            objects.push(ObjectInstance {
                kind: ObjectKind::Chair,
                anchor: [x, y0],
                depth_layer: 2,
                shape_t,
                parts: vec![
                    Part {
                        label: "chair/seat".into(),
                        shape: Shape::RoundedRect {
                            x,
                            y: y0,
                            w,
                            h: sh,
                            radius: shape_t * 0.015,
                        },
                        color: mat.base_color,
                    },
                    Part {
                        label: "chair/backrest".into(),
                        shape: Shape::Rect {
                            x: bx,
                            y: y0 - bh,
                            w: bw,
                            h: bh,
                        },
                        color: scaled(mat.base_color, [0.92, 0.92, 0.92]),
                    },
                    Part {
                        label: "chair/legs".into(),
                        shape: Shape::Rect {
                            x: x + 0.012,
                            y: y0 + sh,
                            w: 0.022,
                            h: ll,
                        },
                        color: scaled(mat.base_color, [0.60, 0.60, 0.60]),
                    },
                    Part {
                        label: "chair/legs".into(),
                        shape: Shape::Rect {
                            x: x + w - 0.034,
                            y: y0 + sh,
                            w: 0.022,
                            h: ll,
                        },
                        color: scaled(mat.base_color, [0.60, 0.60, 0.60]),
                    },
                ],
                material: mat,
            });
        }
    }

    if rng.gen_bool(p.lamp) {
        let mat = pick_material(&mut rng, ObjectKind::Lamp);
        let shape_t = rng.gen_range(0.0f32..=1.0);
        if let Some(x) = place_beside(&mut rng, table_top, 0.16) {
            let cx = x + 0.08;
            let rx = rng.gen_range(0.05f32..=0.075);
            let ry = rng.gen_range(0.04f32..=0.06);
            let yb = rng.gen_range(0.30f32..=0.40);
            let ybot = rng.gen_range(0.86f32..=0.92);
            objects.push(ObjectInstance {
                kind: ObjectKind::Lamp,
                anchor: [cx, yb],
                depth_layer: 2,
                shape_t,
                parts: vec![
                    Part {
                        label: "lamp/stand".into(),
                        shape: Shape::Rect {
                            x: cx - 0.01,
                            y: yb,
                            w: 0.02,
                            h: ybot - yb,
                        },
                        color: scaled(mat.base_color, [0.85, 0.85, 0.85]),
                    },
                    Part {
                        label: "lamp/bulb".into(),
                        shape: Shape::Ellipse {
                            cx,
                            cy: yb - ry + 0.01,
                            rx,
                            ry,
                        },
                        color: scaled(mat.base_color, [1.35, 1.30, 1.10]),
                    },
                ],
                material: mat,
            });
        }
    }

    // Tabletop items live in three disjoint slots of the top's interior,
    // so each keeps clear table pixels around it.
    let slots = table_top.map(|top| {
        let inset = 0.04;
        let x0 = top.x + inset;
        let span = top.w - 2.0 * inset;
        let sw = span / 3.0;
        let mut order = [0usize, 1, 2];
        order.shuffle(&mut rng);
        (top, x0, sw, order)
    });
    let slot_x = |x0: f32, sw: f32, index: usize| x0 + sw * index as f32;

    let pot_coin = rng.gen_bool(p.pot);
    if let (true, Some((top, x0, sw, order))) = (pot_coin, slots) {
        let mat = pick_material(&mut rng, ObjectKind::Pot);
        let shape_t = rng.gen_range(0.0f32..=1.0);
        let sx = slot_x(x0, sw, order[0]);
        let pw = rng.gen_range(0.08f32..=0.12).min(sw - 0.02);
        let ph = rng.gen_range(0.06f32..=0.09);
        let px = sx + 0.01 + rng.gen_range(0.0..=(sw - pw - 0.02));
        objects.push(ObjectInstance {
            kind: ObjectKind::Pot,
            anchor: [px, top.y],
            depth_layer: 3,
            shape_t,
            parts: vec![Part {
                label: "pot".into(),
                shape: Shape::RoundedRect {
                    x: px,
                    y: top.y + 0.012 - ph,
                    w: pw,
                    h: ph,
                    radius: shape_t * 0.025,
                },
                color: mat.base_color,
            }],
            material: mat,
        });
    }

    let plate_coin = rng.gen_bool(p.plate);
    let mut plate_geom: Option<(f32, f32, f32, f32)> = None;
    if let (true, Some((top, x0, sw, order))) = (plate_coin, slots) {
        let mat = pick_material(&mut rng, ObjectKind::Plate);
        let shape_t = rng.gen_range(0.0f32..=1.0);
        let sx = slot_x(x0, sw, order[1]);
        let rx = rng.gen_range(0.030f32..=0.045);
        let ry = (rx * lerp(0.30, 0.45, shape_t)).min(top.h / 2.0 - 0.006);
        let cy = top.y + top.h / 2.0;
        // Reserve room at the slot's right edge for the cutlery.
        let reserve = 0.033;
        let lo = sx + rx + 0.005;
        let hi = sx + sw - rx - reserve;
        let cx = rng.gen_range(lo..=hi.max(lo));
        objects.push(ObjectInstance {
            kind: ObjectKind::Plate,
            anchor: [cx, cy],
            depth_layer: 3,
            shape_t,
            parts: vec![Part {
                label: "plate".into(),
                shape: Shape::Ellipse { cx, cy, rx, ry },
                color: mat.base_color,
            }],
            material: mat,
        });
        plate_geom = Some((cx, cy, rx, ry));
    }

    let cutlery_coin = rng.gen_bool(p.cutlery);
    if let (true, Some((top, ..)), Some((pcx, pcy, prx, pry))) = (cutlery_coin, slots, plate_geom) {
        let mat = pick_material(&mut rng, ObjectKind::Cutlery);
        let shape_t = rng.gen_range(0.0f32..=1.0);
        let ch = (pry * 1.6).min(top.h - 0.012);
        objects.push(ObjectInstance {
            kind: ObjectKind::Cutlery,
            anchor: [pcx + prx + 0.010, pcy],
            depth_layer: 4,
            shape_t,
            parts: vec![Part {
                label: "cutlery".into(),
                shape: Shape::Rect {
                    x: pcx + prx + 0.010,
                    y: pcy - ch / 2.0,
                    w: 0.016,
                    h: ch,
                },
                color: mat.base_color,
            }],
            material: mat,
        });
    }

    if rng.gen_bool(p.vase) {
        let mat = pick_material(&mut rng, ObjectKind::Vase);
        let shape_t = rng.gen_range(0.0f32..=1.0);
        let (cx, bottom, rx, ry) = match slots {
            Some((top, x0, sw, order)) => {
                let sx = slot_x(x0, sw, order[2]);
                let rx = rng.gen_range(0.022f32..=0.038).min((sw - 0.02) / 2.0);
                let ry = rng.gen_range(0.035f32..=0.060);
                let cx = sx + rx + 0.01 + rng.gen_range(0.0..=(sw - 2.0 * rx - 0.02));
                (cx, top.y + 0.012, rx, ry)
            }
            None => {
                let rx = rng.gen_range(0.035f32..=0.060);
                let ry = rng.gen_range(0.050f32..=0.090);
                let cx = rng.gen_range(0.15f32..=1.85);
                let bottom = rng.gen_range(0.80f32..=0.92);
                (cx, bottom, rx, ry)
            }
        };
        objects.push(ObjectInstance {
            kind: ObjectKind::Vase,
            anchor: [cx, bottom],
            depth_layer: 3,
            shape_t,
            parts: vec![Part {
                label: "vase".into(),
                shape: Shape::Ellipse {
                    cx,
                    cy: bottom - ry,
                    rx,
                    ry,
                },
                color: mat.base_color,
            }],
            material: mat,
        });
    }

    SceneSpec {
        seed,
        room_kind,
        objects,
        illumination,
        camera,
    }
}
