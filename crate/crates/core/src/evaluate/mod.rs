//! Scoring outcomes against references, the rate and decrease matrices, and
//! report output.

mod report;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chemgraph::{canonical_id, same_structure, Molecule};
use crate::degrade::{DamageKind, BASE_LABEL};
use crate::harness::RecognitionOutcome;

pub use report::{emit_report, parse_rate_table, ReportFormat};

/// Recorded as the generated id of a failed recognition.
pub const FAILED_ID: &str = "FAILED";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{adapter}/{subset}: outcomes and references disagree at image {detail}")]
    Misaligned {
        adapter: String,
        subset: String,
        detail: String,
    },
    #[error("{adapter}/{subset}: no images to score")]
    EmptySubset { adapter: String, subset: String },
    #[error("duplicate result for {adapter}/{subset}")]
    DuplicateResult { adapter: String, subset: String },
    #[error("no results")]
    NoResults,
    #[error("rate table: {0}")]
    RateTable(String),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A non-negative rational `num / den`, `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        Ratio { num, den }
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Percentage in tenths of a percent, rounded half away from zero.
    pub fn percent_tenths(self) -> i64 {
        round_div(1000 * self.num as i128, self.den as i128)
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }
}

/// `n / d` rounded to the nearest integer, halves away from zero. `d > 0`.
fn round_div(n: i128, d: i128) -> i64 {
    let q = (2 * n.abs() + d) / (2 * d);
    (if n < 0 { -q } else { q }) as i64
}

/// Tenths of a percent as `"94.6"` / `"-1.9"`.
pub fn format_tenths(t: i64) -> String {
    let sign = if t < 0 { "-" } else { "" };
    format!("{sign}{}.{}", t.abs() / 10, t.abs() % 10)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageMatch {
    pub image_id: String,
    pub matched: bool,
    /// Canonical id of the recognized molecule, or `FAILED`.
    pub generated_id: String,
    pub reference_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetResult {
    pub adapter: String,
    pub subset_label: String,
    pub total: u64,
    pub matches: u64,
    /// `matches / total`.
    pub rate: f64,
    #[serde(default)]
    pub per_image: Vec<ImageMatch>,
}

impl SubsetResult {
    /// A result known only by its counts, with no per-image detail.
    pub fn from_counts(adapter: &str, subset_label: &str, matches: u64, total: u64) -> Self {
        assert!(total > 0 && matches <= total, "{matches}/{total}");
        SubsetResult {
            adapter: adapter.to_string(),
            subset_label: subset_label.to_string(),
            total,
            matches,
            rate: matches as f64 / total as f64,
            per_image: Vec::new(),
        }
    }

    pub fn ratio(&self) -> Ratio {
        Ratio::new(self.matches, self.total)
    }

    /// Rate as a percentage rounded to one decimal, e.g. `"94.6"`.
    pub fn rate_percent(&self) -> String {
        format_tenths(self.ratio().percent_tenths())
    }
}

/// Scores `outcomes` against `references` (pairs of image id and molecule).
/// Both sides must cover the same image ids; order does not matter.
pub fn score_subset(
    adapter: &str,
    subset_label: &str,
    outcomes: &[RecognitionOutcome],
    references: &[(String, Molecule)],
) -> Result<SubsetResult, EvalError> {
    let misaligned = |detail: String| EvalError::Misaligned {
        adapter: adapter.to_string(),
        subset: subset_label.to_string(),
        detail,
    };
    if outcomes.is_empty() && references.is_empty() {
        return Err(EvalError::EmptySubset {
            adapter: adapter.to_string(),
            subset: subset_label.to_string(),
        });
    }
    let mut refs: HashMap<&str, &Molecule> = HashMap::new();
    for (id, m) in references {
        if refs.insert(id.as_str(), m).is_some() {
            return Err(misaligned(format!("{id} (duplicate reference)")));
        }
    }
    let mut seen = BTreeSet::new();
    let mut per_image = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        let reference = refs
            .get(o.image_id.as_str())
            .ok_or_else(|| misaligned(format!("{} (no reference)", o.image_id)))?;
        if !seen.insert(o.image_id.as_str()) {
            return Err(misaligned(format!("{} (duplicate outcome)", o.image_id)));
        }
        let generated = o.scored_molecule();
        per_image.push(ImageMatch {
            image_id: o.image_id.clone(),
            matched: same_structure(&generated, reference),
            generated_id: match o.molecule() {
                Some(m) => canonical_id(m).to_string(),
                None => FAILED_ID.to_string(),
            },
            reference_id: canonical_id(reference).to_string(),
        });
    }
    if let Some((id, _)) = references.iter().find(|(id, _)| !seen.contains(id.as_str())) {
        return Err(misaligned(format!("{id} (no outcome)")));
    }
    per_image.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    let total = per_image.len() as u64;
    let matches = per_image.iter().filter(|p| p.matched).count() as u64;
    Ok(SubsetResult {
        adapter: adapter.to_string(),
        subset_label: subset_label.to_string(),
        total,
        matches,
        rate: matches as f64 / total as f64,
        per_image,
    })
}

/// Sort key placing `base` first, then blend, noise, compress and distort
/// subsets by increasing label number, then anything else by name.
pub fn column_key(label: &str) -> (usize, u64, String) {
    if label == BASE_LABEL {
        return (0, 0, String::new());
    }
    if let Some((kind, n)) = label.split_once('_') {
        if let (Ok(kind), Ok(n)) = (kind.parse::<DamageKind>(), n.parse::<u64>()) {
            let family = DamageKind::ALL.iter().position(|k| *k == kind).unwrap();
            return (1 + family, n, String::new());
        }
    }
    (1 + DamageKind::ALL.len(), 0, label.to_string())
}

/// Column labels present in `results`, in report order.
pub fn ordered_columns<'a>(labels: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut cols: Vec<String> = labels
        .into_iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(str::to_string)
        .collect();
    cols.sort_by_key(|c| column_key(c));
    cols
}

/// Adapters in order of first appearance.
fn ordered_adapters(results: &[SubsetResult]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in results {
        if !out.contains(&r.adapter) {
            out.push(r.adapter.clone());
        }
    }
    out
}

fn index_results(results: &[SubsetResult]) -> Result<HashMap<(&str, &str), &SubsetResult>, EvalError> {
    let mut map = HashMap::new();
    for r in results {
        if map.insert((r.adapter.as_str(), r.subset_label.as_str()), r).is_some() {
            return Err(EvalError::DuplicateResult {
                adapter: r.adapter.clone(),
                subset: r.subset_label.clone(),
            });
        }
    }
    Ok(map)
}

/// Recognition rates, adapters by subsets. Missing cells are `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateMatrix {
    pub adapters: Vec<String>,
    pub columns: Vec<String>,
    pub cells: Vec<Vec<Option<Ratio>>>,
}

pub fn rate_table(results: &[SubsetResult]) -> Result<RateMatrix, EvalError> {
    let index = index_results(results)?;
    let adapters = ordered_adapters(results);
    let labels = results.iter().map(|r| r.subset_label.as_str());
    let columns = ordered_columns(std::iter::once(BASE_LABEL).chain(labels));
    let cells = adapters
        .iter()
        .map(|a| {
            columns
                .iter()
                .map(|c| index.get(&(a.as_str(), c.as_str())).map(|r| r.ratio()))
                .collect()
        })
        .collect();
    Ok(RateMatrix { adapters, columns, cells })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DecreaseCell {
    /// Tenths of a percent.
    Tenths(i64),
    /// No base rate to compare against (missing or zero).
    NotAvailable,
}

impl fmt::Display for DecreaseCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecreaseCell::Tenths(t) => f.write_str(&format_tenths(*t)),
            DecreaseCell::NotAvailable => f.write_str("n/a"),
        }
    }
}

/// Percentage decrease relative to each adapter's base rate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecreaseMatrix {
    pub adapters: Vec<String>,
    pub columns: Vec<String>,
    pub cells: Vec<Vec<Option<DecreaseCell>>>,
}

impl DecreaseMatrix {
    pub fn get(&self, adapter: &str, column: &str) -> Option<DecreaseCell> {
        let r = self.adapters.iter().position(|a| a == adapter)?;
        let c = self.columns.iter().position(|x| x == column)?;
        self.cells[r][c]
    }
}

/// `(1 - rate / base) * 100`, exact, rounded to tenths (halves away from
/// zero). `None` when the base rate is zero.
pub fn decrease_tenths(rate: Ratio, base: Ratio) -> Option<i64> {
    if base.is_zero() {
        return None;
    }
    let (bn, bd) = (base.num as i128, base.den as i128);
    let (rn, rd) = (rate.num as i128, rate.den as i128);
    Some(round_div(1000 * (bn * rd - rn * bd), bn * rd))
}

pub fn decrease_table(results: &[SubsetResult]) -> Result<DecreaseMatrix, EvalError> {
    let rates = rate_table(results)?;
    let base_col = rates.columns.iter().position(|c| c == BASE_LABEL);
    let cells = rates
        .cells
        .iter()
        .map(|row| {
            let base = base_col.and_then(|i| row[i]);
            row.iter()
                .map(|cell| {
                    cell.map(|r| match base.and_then(|b| decrease_tenths(r, b)) {
                        Some(t) => DecreaseCell::Tenths(t),
                        None => DecreaseCell::NotAvailable,
                    })
                })
                .collect()
        })
        .collect();
    Ok(DecreaseMatrix {
        adapters: rates.adapters,
        columns: rates.columns,
        cells,
    })
}
