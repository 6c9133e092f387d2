//! The fixed 15-affordance vocabulary.
//!
//! Channel index equals vocabulary index everywhere in the toolkit, and the
//! order below is frozen: files written with one build must read back with
//! the same channel meaning in every later build.

/// Number of affordances in the vocabulary.
pub const AFFORDANCE_COUNT: usize = 15;

/// Canonical affordance names in channel order.
pub const AFFORDANCE_NAMES: [&str; AFFORDANCE_COUNT] = [
    "obstruct",
    "pinch-pull",
    "break",
    "sit",
    "grasp",
    "illumination",
    "support",
    "place-on",
    "hook-pull",
    "tip-push",
    "warmth",
    "observe",
    "dry",
    "roll",
    "walk",
];

/// One affordance from the fixed vocabulary. The discriminant is the
/// channel index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(usize)]
pub enum Affordance {
    Obstruct = 0,
    PinchPull = 1,
    Break = 2,
    Sit = 3,
    Grasp = 4,
    Illumination = 5,
    Support = 6,
    PlaceOn = 7,
    HookPull = 8,
    TipPush = 9,
    Warmth = 10,
    Observe = 11,
    Dry = 12,
    Roll = 13,
    Walk = 14,
}

impl Affordance {
    /// All affordances in channel order.
    pub const ALL: [Affordance; AFFORDANCE_COUNT] = [
        Affordance::Obstruct,
        Affordance::PinchPull,
        Affordance::Break,
        Affordance::Sit,
        Affordance::Grasp,
        Affordance::Illumination,
        Affordance::Support,
        Affordance::PlaceOn,
        Affordance::HookPull,
        Affordance::TipPush,
        Affordance::Warmth,
        Affordance::Observe,
        Affordance::Dry,
        Affordance::Roll,
        Affordance::Walk,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Affordance> {
        Affordance::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        AFFORDANCE_NAMES[self.index()]
    }

    /// Parses a canonical name. Also accepts the two printed aliases seen in
    /// existing tables: `read/watch` for `observe` and `tip/push` for
    /// `tip-push`.
    pub fn parse(name: &str) -> Option<Affordance> {
        match name {
            "read/watch" => return Some(Affordance::Observe),
            "tip/push" => return Some(Affordance::TipPush),
            _ => {}
        }
        AFFORDANCE_NAMES
            .iter()
            .position(|n| *n == name)
            .and_then(Affordance::from_index)
    }
}

impl std::fmt::Display for Affordance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
