//! Generative checks that resolution always prefers the more specific
//! pattern, regardless of which other patterns are present.

use afford_core::{AffordanceVector, AFFORDANCE_COUNT};
use afford_transfer::{TransferEntry, TransferTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn marker_vector(marker: usize) -> AffordanceVector {
    // Encodes an identity in the vector so tests can tell rows apart.
    let mut values = [0.0f32; AFFORDANCE_COUNT];
    values[marker % AFFORDANCE_COUNT] = 1.0;
    values[(marker / AFFORDANCE_COUNT) % AFFORDANCE_COUNT] = 0.5;
    AffordanceVector::new(values).unwrap()
}

fn random_path(rng: &mut ChaCha8Rng) -> String {
    const SEGMENTS: [&str; 8] = [
        "cabinet", "drawer", "knob", "table", "top", "door", "handle", "lamp",
    ];
    let depth = rng.gen_range(1..=4);
    (0..depth)
        .map(|_| SEGMENTS[rng.gen_range(0..SEGMENTS.len())])
        .collect::<Vec<_>>()
        .join("/")
}

/// All patterns that can match `path`, most specific first.
fn matching_patterns(path: &str) -> Vec<String> {
    let segments: Vec<&str> = path.split('/').collect();
    let n = segments.len();
    let mut out: Vec<String> = Vec::new();
    for k in 0..n {
        let full = segments[k..].join("/");
        if !out.contains(&full) {
            out.push(full);
        }
        let starred = if k + 1 < n {
            format!("*/{}", segments[k + 1..].join("/"))
        } else {
            format!("*/{}", segments[k])
        };
        if !out.contains(&starred) {
            out.push(starred);
        }
    }
    out.push("*".to_string());
    out
}

#[test]
fn more_specific_pattern_always_wins() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    for _ in 0..300 {
        let path = random_path(&mut rng);
        let patterns = matching_patterns(&path);
        if patterns.len() < 2 {
            continue;
        }
        let specific = rng.gen_range(0..patterns.len() - 1);
        let general = rng.gen_range(specific + 1..patterns.len());

        let base = TransferTable::new(vec![TransferEntry {
            pattern: patterns[general].clone(),
            vector: marker_vector(1),
        }])
        .unwrap();
        assert_eq!(
            base.resolve(&path),
            Some(&marker_vector(1)),
            "path {path} should match {}",
            patterns[general]
        );

        // Adding a strictly more specific row must change the result to it.
        let extended = TransferTable::new(vec![
            TransferEntry {
                pattern: patterns[general].clone(),
                vector: marker_vector(1),
            },
            TransferEntry {
                pattern: patterns[specific].clone(),
                vector: marker_vector(2),
            },
        ])
        .unwrap();
        assert_eq!(
            extended.resolve(&path),
            Some(&marker_vector(2)),
            "path {path}: {} should beat {}",
            patterns[specific],
            patterns[general]
        );
    }
}

#[test]
fn resolution_is_first_hit_over_full_candidate_list() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..200 {
        let path = random_path(&mut rng);
        let patterns = matching_patterns(&path);
        // Put a random subset of matching patterns in the table; the
        // earliest in candidate order must win.
        let chosen: Vec<usize> =
            (0..patterns.len()).filter(|_| rng.gen_bool(0.5)).collect();
        if chosen.is_empty() {
            continue;
        }
        let entries: Vec<TransferEntry> = chosen
            .iter()
            .map(|&i| TransferEntry {
                pattern: patterns[i].clone(),
                vector: marker_vector(i),
            })
            .collect();
        let table = TransferTable::new(entries).unwrap();
        let expected = marker_vector(*chosen.iter().min().unwrap());
        assert_eq!(table.resolve(&path), Some(&expected), "path {path}");
    }
}

#[test]
fn resolution_is_pure() {
    let table = TransferTable::new(vec![
        TransferEntry {
            pattern: "*/knob".to_string(),
            vector: marker_vector(3),
        },
        TransferEntry {
            pattern: "door/knob".to_string(),
            vector: marker_vector(4),
        },
    ])
    .unwrap();
    let first = table.resolve("door/knob").copied();
    for _ in 0..10 {
        assert_eq!(table.resolve("door/knob").copied(), first);
    }
}
