//! Report files. Every format carries the rate matrix and the decrease
//! matrix with columns ordered base, blend_*, noise_*, compress_*,
//! distort_*; each call also writes per-image detail files under
//! `details/<adapter>/<subset>.tsv`.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use super::{
    decrease_table, format_tenths, rate_table, DecreaseCell, DecreaseMatrix, EvalError, RateMatrix,
    SubsetResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            _ => Err(format!("unknown report format {s:?} (csv, json, markdown)")),
        }
    }
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf, EvalError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| EvalError::Io { path: dir.to_path_buf(), source })?;
    }
    fs::write(&path, text).map_err(|source| EvalError::Io { path: path.clone(), source })?;
    Ok(path)
}

fn rate_cell(r: Option<super::Ratio>) -> String {
    r.map(|r| format_tenths(r.percent_tenths())).unwrap_or_default()
}

fn decrease_cell(c: Option<DecreaseCell>) -> String {
    c.map(|c| c.to_string()).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_table(columns: &[String], rows: Vec<(String, Vec<String>)>) -> String {
    let mut out = String::from("adapter");
    for c in columns {
        out.push(',');
        out.push_str(&csv_field(c));
    }
    out.push('\n');
    for (name, cells) in rows {
        out.push_str(&csv_field(&name));
        for c in cells {
            out.push(',');
            out.push_str(&csv_field(&c));
        }
        out.push('\n');
    }
    out
}

fn markdown_table(columns: &[String], rows: Vec<(String, Vec<String>)>) -> String {
    let mut out = String::from("| adapter |");
    for c in columns {
        out.push_str(&format!(" {c} |"));
    }
    out.push_str("\n|---|");
    out.push_str(&"---:|".repeat(columns.len()));
    out.push('\n');
    for (name, cells) in rows {
        out.push_str(&format!("| {} |", name.replace('|', "\\|")));
        for c in cells {
            out.push_str(&format!(" {c} |"));
        }
        out.push('\n');
    }
    out
}

fn rate_rows(m: &RateMatrix, pct: bool) -> Vec<(String, Vec<String>)> {
    m.adapters
        .iter()
        .zip(&m.cells)
        .map(|(a, row)| {
            let cells = row
                .iter()
                .map(|c| {
                    let s = rate_cell(*c);
                    if pct && !s.is_empty() { s + "%" } else { s }
                })
                .collect();
            (a.clone(), cells)
        })
        .collect()
}

fn decrease_rows(m: &DecreaseMatrix, pct: bool) -> Vec<(String, Vec<String>)> {
    m.adapters
        .iter()
        .zip(&m.cells)
        .map(|(a, row)| {
            let cells = row
                .iter()
                .map(|c| match c {
                    Some(DecreaseCell::Tenths(_)) if pct => decrease_cell(*c) + "%",
                    _ => decrease_cell(*c),
                })
                .collect();
            (a.clone(), cells)
        })
        .collect()
}

#[derive(Serialize)]
struct JsonRow<T> {
    adapter: String,
    values: Vec<Option<T>>,
}

#[derive(Serialize)]
struct JsonMatrix<T> {
    columns: Vec<String>,
    rows: Vec<JsonRow<T>>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum JsonDecrease {
    Value(f64),
    Text(&'static str),
}

#[derive(Serialize)]
struct JsonReport<'a> {
    rate_matrix: JsonMatrix<f64>,
    decrease_matrix: JsonMatrix<JsonDecrease>,
    results: &'a [SubsetResult],
}

fn json_report(results: &[SubsetResult], rates: &RateMatrix, dec: &DecreaseMatrix) -> String {
    let tenths = |t: i64| t as f64 / 10.0;
    let report = JsonReport {
        rate_matrix: JsonMatrix {
            columns: rates.columns.clone(),
            rows: rates
                .adapters
                .iter()
                .zip(&rates.cells)
                .map(|(a, row)| JsonRow {
                    adapter: a.clone(),
                    values: row.iter().map(|c| c.map(|r| tenths(r.percent_tenths()))).collect(),
                })
                .collect(),
        },
        decrease_matrix: JsonMatrix {
            columns: dec.columns.clone(),
            rows: dec
                .adapters
                .iter()
                .zip(&dec.cells)
                .map(|(a, row)| JsonRow {
                    adapter: a.clone(),
                    values: row
                        .iter()
                        .map(|c| {
                            c.map(|c| match c {
                                DecreaseCell::Tenths(t) => JsonDecrease::Value(tenths(t)),
                                DecreaseCell::NotAvailable => JsonDecrease::Text("n/a"),
                            })
                        })
                        .collect(),
                })
                .collect(),
        },
        results,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    text
}

fn detail_file(r: &SubsetResult) -> String {
    let mut out = String::from("image_id\tmatched\tgenerated_id\treference_id\n");
    for p in &r.per_image {
        out.push_str(&format!("{}\t{}\t{}\t{}\n", p.image_id, p.matched, p.generated_id, p.reference_id));
    }
    out.push_str(&format!("# {}/{}: {} of {} matched ({}%)\n", r.adapter, r.subset_label, r.matches, r.total, r.rate_percent()));
    out
}

/// Writes the report for `format` into `out_dir`, returning the paths
/// written.
pub fn emit_report(results: &[SubsetResult], format: ReportFormat, out_dir: &Path) -> Result<Vec<PathBuf>, EvalError> {
    if results.is_empty() {
        return Err(EvalError::NoResults);
    }
    let rates = rate_table(results)?;
    let dec = decrease_table(results)?;
    let mut written = Vec::new();
    match format {
        ReportFormat::Csv => {
            written.push(write(out_dir.join("rates.csv"), &csv_table(&rates.columns, rate_rows(&rates, false)))?);
            written.push(write(out_dir.join("decrease.csv"), &csv_table(&dec.columns, decrease_rows(&dec, false)))?);
        }
        ReportFormat::Json => {
            written.push(write(out_dir.join("report.json"), &json_report(results, &rates, &dec))?);
        }
        ReportFormat::Markdown => {
            let text = format!(
                "## Recognition rate\n\n{}\n## Decrease relative to base\n\n{}",
                markdown_table(&rates.columns, rate_rows(&rates, true)),
                markdown_table(&dec.columns, decrease_rows(&dec, true)),
            );
            written.push(write(out_dir.join("report.md"), &text)?);
        }
    }
    for r in results.iter().filter(|r| !r.per_image.is_empty()) {
        let path = out_dir.join("details").join(&r.adapter).join(format!("{}.tsv", r.subset_label));
        written.push(write(path, &detail_file(r))?);
    }
    Ok(written)
}

/// Reads a percentage table (tab- or comma-separated; header row of subset
/// labels after a first adapter column; cells like `82.2%`, `82.2` or
/// blank). Each cell becomes a result of `tenths / 1000`.
pub fn parse_rate_table(text: &str) -> Result<Vec<SubsetResult>, EvalError> {
    let err = |line: usize, msg: String| EvalError::RateTable(format!("line {line}: {msg}"));
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| EvalError::RateTable("empty table".into()))?;
    let sep = if header.contains('\t') { '\t' } else { ',' };
    let labels: Vec<&str> = header.split(sep).skip(1).map(str::trim).collect();
    let mut out = Vec::new();
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(sep).map(str::trim).collect();
        if fields.len() != labels.len() + 1 {
            return Err(err(i + 1, format!("expected {} fields, found {}", labels.len() + 1, fields.len())));
        }
        let adapter = fields[0];
        for (label, cell) in labels.iter().zip(&fields[1..]) {
            let v = cell.trim_end_matches('%');
            if v.is_empty() || v == "n/a" {
                continue;
            }
            let tenths = parse_tenths(v).ok_or_else(|| err(i + 1, format!("bad percentage {cell:?}")))?;
            if !(0..=1000).contains(&tenths) {
                return Err(err(i + 1, format!("{cell:?} is outside 0-100%")));
            }
            out.push(SubsetResult::from_counts(adapter, label, tenths as u64, 1000));
        }
    }
    Ok(out)
}

/// `"82.2"` -> 822, `"-1.9"` -> -19, `"40"` -> 400. At most one decimal.
pub(crate) fn parse_tenths(s: &str) -> Option<i64> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, "0"));
    if int.is_empty() || frac.len() != 1 || !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let v = int.parse::<i64>().ok()? * 10 + frac.parse::<i64>().ok()?;
    Some(if neg { -v } else { v })
}
