//! Flat-file formats: one-column sample CSVs, curve tables and JSON sidecars.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

pub const SAMPLE_HEADER: &str = "time";

/// Read a sample file: header `time`, one value per row.
pub fn read_sample(path: &Path) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let headers = reader.headers().with_context(|| format!("{}: cannot read header", path.display()))?;
    if headers.len() != 1 || headers.get(0).map(str::trim) != Some(SAMPLE_HEADER) {
        bail!("{}: expected the single header '{SAMPLE_HEADER}'", path.display());
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.with_context(|| format!("{}: malformed row", path.display()))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = record.get(0).unwrap_or("").trim();
        let value: f64 = field
            .parse()
            .with_context(|| format!("{}:{line}: '{field}' is not a number", path.display()))?;
        if !(value.is_finite() && value > 0.0) {
            bail!("{}:{line}: failure times must be finite and positive, got {value}", path.display());
        }
        out.push(value);
    }
    Ok(out)
}

/// Write a sample file with LF line endings. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_sample(path: &Path, values: &[f64]) -> Result<()> {
    let mut text = String::with_capacity(16 * values.len() + 8);
    text.push_str(SAMPLE_HEADER);
    text.push('\n');
    for v in values {
        text.push_str(&v.to_string());
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{}: invalid JSON", path.display()))
}

/// Columns of a curve table: a `time` column followed by named curves.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub time: Vec<f64>,
    pub curves: Vec<(String, Vec<f64>)>,
}

impl CurveTable {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)
            .with_context(|| format!("cannot write {}", path.display()))?;
        let mut header = vec![SAMPLE_HEADER.to_string()];
        header.extend(self.curves.iter().map(|(name, _)| name.clone()));
        writer.write_record(&header)?;
        for (i, t) in self.time.iter().enumerate() {
            let mut row = vec![t.to_string()];
            row.extend(self.curves.iter().map(|(_, v)| v[i].to_string()));
            writer.write_record(&row)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).with_context(|| format!("cannot open {}", path.display()))?;
        let headers = reader.headers()?.clone();
        if headers.get(0).map(str::trim) != Some(SAMPLE_HEADER) {
            bail!("{}: first column must be '{SAMPLE_HEADER}'", path.display());
        }
        let mut table = CurveTable {
            time: Vec::new(),
            curves: headers.iter().skip(1).map(|h| (h.trim().to_string(), Vec::new())).collect(),
        };
        for record in reader.records() {
            let record = record.with_context(|| format!("{}: malformed row", path.display()))?;
            let line = record.position().map_or(0, |p| p.line());
            let mut values = record.iter().map(|f| {
                f.trim()
                    .parse::<f64>()
                    .with_context(|| format!("{}:{line}: '{f}' is not a number", path.display()))
            });
            table.time.push(values.next().context("empty row")??);
            for (_, column) in table.curves.iter_mut() {
                column.push(values.next().with_context(|| format!("{}:{line}: missing value", path.display()))??);
            }
        }
        if table.time.is_empty() || table.curves.is_empty() {
            bail!("{}: no curves to plot", path.display());
        }
        Ok(table)
    }
}
