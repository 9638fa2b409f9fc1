use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use tclust_core::DataMatrix;

fn parse_cell(field: &str) -> Option<f64> {
    field.trim().parse::<f64>().ok()
}

/// Reads a comma-separated numeric table. The first line is treated as a
/// header when any of its fields is not a number.
pub fn read_data(path: &Path) -> Result<DataMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let mut names = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record = record.with_context(|| format!("{}: line {line}", path.display()))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if i == 0 && record.iter().any(|f| parse_cell(f).is_none()) {
            names = Some(record.iter().map(str::to_owned).collect::<Vec<_>>());
            continue;
        }
        let width = names
            .as_ref()
            .map(Vec::len)
            .or_else(|| rows.first().map(Vec::len))
            .unwrap_or(record.len());
        if record.len() != width {
            bail!(
                "{}: line {line} has {} fields, expected {width}",
                path.display(),
                record.len()
            );
        }
        let mut row = Vec::with_capacity(width);
        for (j, field) in record.iter().enumerate() {
            match parse_cell(field) {
                Some(v) if v.is_finite() => row.push(v),
                _ => bail!(
                    "{}: line {line}, column {}: {field:?} is not a finite number",
                    path.display(),
                    j + 1
                ),
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    let data = DataMatrix::from_rows(&rows)?;
    match names {
        Some(n) => Ok(data.with_names(n)?),
        None => Ok(data),
    }
}

/// Reads one integer label per line from the last column, skipping a
/// non-numeric header.
pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record = record.with_context(|| format!("{}: line {line}", path.display()))?;
        let Some(field) = record.iter().next_back() else {
            continue;
        };
        match field.parse::<usize>() {
            Ok(v) => out.push(v),
            Err(_) if i == 0 => continue,
            Err(_) => bail!(
                "{}: line {line}, column {}: {field:?} is not a label",
                path.display(),
                record.len()
            ),
        }
    }
    Ok(out)
}

pub fn write_data(path: &Path, data: &DataMatrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    let header: Vec<String> = match data.names() {
        Some(n) => n.to_vec(),
        None => (1..=data.p()).map(|j| format!("x{j}")).collect(),
    };
    w.write_record(&header)?;
    for row in data.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(["label"])?;
    for l in labels {
        w.write_record([l.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
