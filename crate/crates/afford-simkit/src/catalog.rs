//! The built-in object catalog: kinds, their part label paths, and the
//! material palette each kind may draw from.
//!
//! This catalog is a small fixture set invented for this project; it is
//! the closed world the bundled transfer table covers, not an inventory
//! taken from any external dataset.

use serde::{Deserialize, Serialize};

/// Every label path the renderer can emit, in legend order. A pixel's
/// label index is its position here plus one (index 0 stays reserved for
/// "unlabeled", which the simulator never produces).
pub const CATALOG_LABELS: [&str; 24] = [
    "wall",
    "floor",
    "void",
    "road",
    "rug",
    "fireplace",
    "door/panel",
    "door/handle",
    "door/knob",
    "window",
    "display",
    "button-panel",
    "towel",
    "table/top",
    "table/legs",
    "chair/seat",
    "chair/backrest",
    "chair/legs",
    "lamp/bulb",
    "lamp/stand",
    "pot",
    "plate",
    "cutlery",
    "vase",
];

/// 1-based label index of a catalog path.
pub fn label_index(path: &str) -> Option<u16> {
    CATALOG_LABELS
        .iter()
        .position(|p| *p == path)
        .map(|i| (i + 1) as u16)
}

/// The full legend shared by every rendered label map.
pub fn catalog_legend() -> std::collections::BTreeMap<u16, String> {
    CATALOG_LABELS
        .iter()
        .enumerate()
        .map(|(i, p)| ((i + 1) as u16, p.to_string()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectKind {
    Wall,
    Floor,
    RoadVoid,
    Rug,
    Fireplace,
    Door,
    Window,
    Display,
    ButtonPanel,
    Towel,
    Table,
    Chair,
    Lamp,
    Pot,
    Plate,
    Cutlery,
    Vase,
}

/// A material: flat base color plus the strength of its texture noise and
/// a glossiness scalar driving the highlight band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    pub base_color: [f32; 3],
    pub noise_amplitude: f32,
    pub gloss: f32,
}

pub(crate) struct MaterialDef {
    pub name: &'static str,
    pub base_color: [f32; 3],
    pub noise_amplitude: f32,
    pub gloss: f32,
}

impl MaterialDef {
    pub fn to_material(&self) -> Material {
        Material {
            name: self.name.to_string(),
            base_color: self.base_color,
            noise_amplitude: self.noise_amplitude,
            gloss: self.gloss,
        }
    }
}

const fn m(name: &'static str, base_color: [f32; 3], noise_amplitude: f32, gloss: f32) -> MaterialDef {
    MaterialDef {
        name,
        base_color,
        noise_amplitude,
        gloss,
    }
}

/// Materials allowed for a kind. Floors skew warm and dark, walls light
/// and flat, so appearance carries a usable signal for the large classes.
pub(crate) fn material_set(kind: ObjectKind) -> &'static [MaterialDef] {
    const WALL: &[MaterialDef] = &[
        m("plaster-cream", [0.88, 0.84, 0.74], 0.05, 0.0),
        m("paint-sage", [0.72, 0.78, 0.68], 0.06, 0.0),
        m("paint-sky", [0.70, 0.78, 0.86], 0.06, 0.0),
        m("wallpaper-rose", [0.85, 0.74, 0.72], 0.08, 0.0),
    ];
    const FLOOR: &[MaterialDef] = &[
        m("wood-honey", [0.62, 0.45, 0.28], 0.18, 0.10),
        m("wood-walnut", [0.42, 0.30, 0.20], 0.20, 0.12),
        m("tile-gray", [0.58, 0.58, 0.60], 0.10, 0.25),
        m("terracotta", [0.66, 0.40, 0.28], 0.15, 0.05),
    ];
    const ROAD_VOID: &[MaterialDef] = &[
        m("dusk", [0.62, 0.60, 0.66], 0.10, 0.0),
        m("clear", [0.72, 0.70, 0.72], 0.08, 0.0),
    ];
    const RUG: &[MaterialDef] = &[
        m("wool-red", [0.52, 0.26, 0.24], 0.15, 0.0),
        m("wool-teal", [0.25, 0.45, 0.46], 0.15, 0.0),
        m("jute", [0.68, 0.58, 0.42], 0.20, 0.0),
    ];
    const FIREPLACE: &[MaterialDef] = &[
        m("brick", [0.55, 0.30, 0.22], 0.22, 0.0),
        m("stone", [0.52, 0.50, 0.48], 0.18, 0.0),
    ];
    const DOOR: &[MaterialDef] = &[
        m("wood-white", [0.85, 0.83, 0.78], 0.06, 0.10),
        m("wood-brown", [0.48, 0.34, 0.22], 0.12, 0.15),
    ];
    const WINDOW: &[MaterialDef] = &[
        m("glass-day", [0.70, 0.80, 0.90], 0.05, 0.60),
        m("glass-frost", [0.80, 0.84, 0.88], 0.04, 0.50),
    ];
    const DISPLAY: &[MaterialDef] = &[
        m("screen-dark", [0.16, 0.18, 0.22], 0.04, 0.60),
        m("screen-glow", [0.30, 0.42, 0.55], 0.05, 0.60),
    ];
    const BUTTON_PANEL: &[MaterialDef] = &[
        m("plastic-white", [0.88, 0.88, 0.86], 0.03, 0.20),
        m("plastic-gray", [0.55, 0.56, 0.58], 0.03, 0.20),
    ];
    const TOWEL: &[MaterialDef] = &[
        m("cotton-white", [0.92, 0.92, 0.90], 0.08, 0.0),
        m("cotton-striped", [0.70, 0.80, 0.85], 0.15, 0.0),
    ];
    const TABLE: &[MaterialDef] = &[
        m("wood-oak", [0.58, 0.42, 0.26], 0.15, 0.18),
        m("wood-dark", [0.36, 0.26, 0.18], 0.15, 0.22),
        m("steel-frame", [0.62, 0.64, 0.66], 0.06, 0.45),
    ];
    const CHAIR: &[MaterialDef] = &[
        m("wood-oak", [0.58, 0.42, 0.26], 0.15, 0.18),
        m("fabric-blue", [0.34, 0.40, 0.58], 0.12, 0.0),
        m("fabric-red", [0.55, 0.28, 0.26], 0.12, 0.0),
    ];
    const LAMP: &[MaterialDef] = &[
        m("brass", [0.72, 0.60, 0.34], 0.08, 0.50),
        m("steel-lamp", [0.60, 0.62, 0.64], 0.06, 0.40),
    ];
    const POT: &[MaterialDef] = &[
        m("steel-pot", [0.64, 0.66, 0.68], 0.05, 0.50),
        m("copper", [0.68, 0.42, 0.30], 0.07, 0.45),
        m("enamel-black", [0.20, 0.20, 0.22], 0.04, 0.35),
    ];
    const PLATE: &[MaterialDef] = &[
        m("porcelain", [0.92, 0.92, 0.90], 0.02, 0.30),
        m("stoneware", [0.72, 0.66, 0.58], 0.06, 0.20),
    ];
    const CUTLERY: &[MaterialDef] = &[m("steel-cutlery", [0.70, 0.72, 0.75], 0.03, 0.60)];
    const VASE: &[MaterialDef] = &[
        m("ceramic-blue", [0.35, 0.48, 0.68], 0.06, 0.35),
        m("ceramic-terra", [0.62, 0.40, 0.30], 0.08, 0.30),
    ];
    match kind {
        ObjectKind::Wall => WALL,
        ObjectKind::Floor => FLOOR,
        ObjectKind::RoadVoid => ROAD_VOID,
        ObjectKind::Rug => RUG,
        ObjectKind::Fireplace => FIREPLACE,
        ObjectKind::Door => DOOR,
        ObjectKind::Window => WINDOW,
        ObjectKind::Display => DISPLAY,
        ObjectKind::ButtonPanel => BUTTON_PANEL,
        ObjectKind::Towel => TOWEL,
        ObjectKind::Table => TABLE,
        ObjectKind::Chair => CHAIR,
        ObjectKind::Lamp => LAMP,
        ObjectKind::Pot => POT,
        ObjectKind::Plate => PLATE,
        ObjectKind::Cutlery => CUTLERY,
        ObjectKind::Vase => VASE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use afford_core::raster::validate_label_path;

    #[test]
    fn catalog_paths_are_valid_and_unique() {
        for path in CATALOG_LABELS {
            validate_label_path(path).unwrap();
        }
        let mut sorted = CATALOG_LABELS.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), CATALOG_LABELS.len());
    }

    #[test]
    fn label_indices_are_one_based_and_stable() {
        assert_eq!(label_index("wall"), Some(1));
        assert_eq!(label_index("vase"), Some(24));
        assert_eq!(label_index("unicorn"), None);
        let legend = catalog_legend();
        assert_eq!(legend.len(), 24);
        assert_eq!(legend.get(&14).map(String::as_str), Some("table/top"));
        assert!(!legend.contains_key(&0));
    }

    #[test]
    fn every_kind_has_materials() {
        let kinds = [
            ObjectKind::Wall,
            ObjectKind::Floor,
            ObjectKind::RoadVoid,
            ObjectKind::Rug,
            ObjectKind::Fireplace,
            ObjectKind::Door,
            ObjectKind::Window,
            ObjectKind::Display,
            ObjectKind::ButtonPanel,
            ObjectKind::Towel,
            ObjectKind::Table,
            ObjectKind::Chair,
            ObjectKind::Lamp,
            ObjectKind::Pot,
            ObjectKind::Plate,
            ObjectKind::Cutlery,
            ObjectKind::Vase,
        ];
        for kind in kinds {
            let set = material_set(kind);
            assert!(!set.is_empty());
            for def in set {
                assert!(def.base_color.iter().all(|c| (0.0..=1.0).contains(c)));
                assert!(def.noise_amplitude >= 0.0 && def.gloss >= 0.0);
            }
        }
    }

    #[test]
    fn kind_serializes_in_kebab_case() {
        let json = serde_json::to_string(&ObjectKind::ButtonPanel).unwrap();
        assert_eq!(json, "\"button-panel\"");
        let back: ObjectKind = serde_json::from_str("\"road-void\"").unwrap();
        assert_eq!(back, ObjectKind::RoadVoid);
    }
}
