//! Transfer tables: mapping part-label paths like `door/knob` onto
//! 15-value affordance vectors.
//!
//! Tables are flat TSV files. Lookup walks from specific to general: the
//! exact path first, then the path with its leading prefix replaced by `*`,
//! then the same two forms for every shorter suffix, finishing with the bare
//! last segment, `*/last-segment`, and finally a bare `*` catch-all if the
//! table has one. The first hit wins.

use std::collections::HashMap;

use afford_core::{
    Affordance, AffordanceTensor, AffordanceVector, CoverageMask, PartLabelMap, AFFORDANCE_COUNT,
};
use thiserror::Error;

/// Upper bound on distinct patterns in one table.
pub const MAX_ENTRIES: usize = 500;

#[derive(Debug, Error)]
pub enum TransferError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid table: {0}")]
    Invalid(String),
}

impl TransferError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        TransferError::Parse {
            line,
            message: message.into(),
        }
    }
}

/// One table row: a pattern and the affordance vector it assigns.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferEntry {
    pub pattern: String,
    pub vector: AffordanceVector,
}

/// An immutable, validated transfer table.
#[derive(Debug, Clone)]
pub struct TransferTable {
    entries: Vec<TransferEntry>,
    index: HashMap<String, usize>,
}

/// Checks pattern syntax: label-path rules, except that `*` may appear as
/// the entire first segment (or stand alone).
pub fn validate_pattern(pattern: &str) -> Result<(), String> {
    if pattern.is_empty() {
        return Err("pattern is empty".to_string());
    }
    for (i, segment) in pattern.split('/').enumerate() {
        if segment.is_empty() {
            return Err(format!("pattern '{pattern}' has an empty segment"));
        }
        if segment.contains('*') && !(i == 0 && segment == "*") {
            return Err(format!(
                "pattern '{pattern}': '*' is only allowed as the entire first segment"
            ));
        }
    }
    if pattern.chars().any(|c| c.is_ascii_uppercase()) {
        return Err(format!("pattern '{pattern}' contains uppercase characters"));
    }
    Ok(())
}

/// Lookup candidates for a path, most specific first.
fn candidates(path: &str) -> Vec<String> {
    let segments: Vec<&str> = path.split('/').collect();
    let n = segments.len();
    let mut out: Vec<String> = Vec::with_capacity(2 * n + 1);
    let push = |candidate: String, out: &mut Vec<String>| {
        if !out.contains(&candidate) {
            out.push(candidate);
        }
    };
    for k in 0..n {
        push(segments[k..].join("/"), &mut out);
        if k + 1 < n {
            push(format!("*/{}", segments[k + 1..].join("/")), &mut out);
        } else {
            push(format!("*/{}", segments[k]), &mut out);
        }
    }
    push("*".to_string(), &mut out);
    out
}

impl TransferTable {
    /// Builds a table from rows, rejecting invalid patterns, duplicates,
    /// and more than [`MAX_ENTRIES`] rows.
    pub fn new(entries: Vec<TransferEntry>) -> Result<TransferTable, TransferError> {
        if entries.len() > MAX_ENTRIES {
            return Err(TransferError::Invalid(format!(
                "table has {} entries, maximum is {MAX_ENTRIES}",
                entries.len()
            )));
        }
        let mut index = HashMap::with_capacity(entries.len());
        for (i, entry) in entries.iter().enumerate() {
            validate_pattern(&entry.pattern).map_err(TransferError::Invalid)?;
            if index.insert(entry.pattern.clone(), i).is_some() {
                return Err(TransferError::Invalid(format!(
                    "duplicate pattern '{}'",
                    entry.pattern
                )));
            }
        }
        Ok(TransferTable { entries, index })
    }

    /// Parses the TSV table format: a header line
    /// `pattern<TAB>obstruct<TAB>...` with the 15 affordance columns in
    /// vocabulary order (printed aliases accepted), then one row per
    /// pattern with values from {0, 0.5, 1}. Lines starting with `#` and
    /// blank lines are ignored.
    pub fn parse(text: &str) -> Result<TransferTable, TransferError> {
        let mut entries: Vec<TransferEntry> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut header_seen = false;
        for (line_index, raw) in text.lines().enumerate() {
            let line_no = line_index + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cells: Vec<&str> = line.split('\t').collect();
            if !header_seen {
                Self::check_header(line_no, &cells)?;
                header_seen = true;
                continue;
            }
            if cells.len() != 1 + AFFORDANCE_COUNT {
                return Err(TransferError::parse(
                    line_no,
                    format!(
                        "expected {} tab-separated cells, found {}",
                        1 + AFFORDANCE_COUNT,
                        cells.len()
                    ),
                ));
            }
            let pattern = cells[0].to_string();
            validate_pattern(&pattern).map_err(|m| TransferError::parse(line_no, m))?;
            let mut values = [0.0f32; AFFORDANCE_COUNT];
            for (i, cell) in cells[1..].iter().enumerate() {
                let value: f32 = cell.trim().parse().map_err(|_| {
                    TransferError::parse(line_no, format!("'{cell}' is not a number"))
                })?;
                if ![0.0, 0.5, 1.0].contains(&value) {
                    return Err(TransferError::parse(
                        line_no,
                        format!(
                            "value {value} for '{}' is not one of 0, 0.5, 1",
                            Affordance::ALL[i].name()
                        ),
                    ));
                }
                values[i] = value;
            }
            let vector = AffordanceVector::new(values)
                .map_err(|e| TransferError::parse(line_no, e.to_string()))?;
            if index.contains_key(&pattern) {
                return Err(TransferError::parse(
                    line_no,
                    format!("duplicate pattern '{pattern}'"),
                ));
            }
            if entries.len() == MAX_ENTRIES {
                return Err(TransferError::parse(
                    line_no,
                    format!("table exceeds the maximum of {MAX_ENTRIES} entries"),
                ));
            }
            index.insert(pattern.clone(), entries.len());
            entries.push(TransferEntry { pattern, vector });
        }
        if !header_seen {
            return Err(TransferError::Invalid(
                "table has no header line".to_string(),
            ));
        }
        Ok(TransferTable { entries, index })
    }

    fn check_header(line_no: usize, cells: &[&str]) -> Result<(), TransferError> {
        if cells.len() != 1 + AFFORDANCE_COUNT {
            return Err(TransferError::parse(
                line_no,
                format!(
                    "header has {} cells, expected {}",
                    cells.len(),
                    1 + AFFORDANCE_COUNT
                ),
            ));
        }
        if cells[0] != "pattern" {
            return Err(TransferError::parse(
                line_no,
                format!("header must start with 'pattern', found '{}'", cells[0]),
            ));
        }
        for (i, cell) in cells[1..].iter().enumerate() {
            match Affordance::parse(cell) {
                Some(a) if a.index() == i => {}
                Some(a) => {
                    return Err(TransferError::parse(
                        line_no,
                        format!(
                            "affordance column {} is '{}' ({}), expected '{}'",
                            i + 1,
                            cell,
                            a.name(),
                            Affordance::ALL[i].name()
                        ),
                    ));
                }
                None => {
                    return Err(TransferError::parse(
                        line_no,
                        format!("unknown affordance column '{cell}'"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn entries(&self) -> &[TransferEntry] {
        &self.entries
    }

    /// Resolves a label path to its affordance vector, or `None` when no
    /// pattern matches.
    pub fn resolve(&self, path: &str) -> Option<&AffordanceVector> {
        if path.is_empty() {
            return None;
        }
        for candidate in candidates(path) {
            if let Some(&i) = self.index.get(&candidate) {
                return Some(&self.entries[i].vector);
            }
        }
        None
    }

    /// Resolves every pixel of a label map. Pixels whose label resolves get
    /// its vector across the 15 channels and a 1 in the coverage mask;
    /// unlabeled (index 0) and unresolvable pixels get zeros and a 0.
    pub fn resolve_map(&self, labels: &PartLabelMap) -> (AffordanceTensor, CoverageMask) {
        let height = labels.height();
        let width = labels.width();
        let mut resolved: HashMap<u16, Option<AffordanceVector>> = HashMap::new();
        for (index, path) in labels.legend() {
            resolved.insert(*index, self.resolve(path).copied());
        }
        let mut tensor = AffordanceTensor::zeros(height, width);
        let mut mask = CoverageMask::all_invalid(height, width);
        for y in 0..height {
            for x in 0..width {
                let index = labels.index_at(x, y);
                if index == 0 {
                    continue;
                }
                if let Some(Some(vector)) = resolved.get(&index) {
                    mask.set(y, x, true);
                    for (a, v) in vector.values().iter().enumerate() {
                        tensor.set(a, y, x, *v);
                    }
                }
            }
        }
        (tensor, mask)
    }
}
