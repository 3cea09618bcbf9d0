//! CSV ingestion and table emission.
//!
//! Dataset files have a header row, the response in a column named `y`
//! first, and one column per predictor after it. Expression matrices are
//! feature-major: the first column holds feature ids and every further
//! column is one sample.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::CliError;
use crate::model::Dataset;

fn csv_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn parse_cell(path: &Path, row: usize, col: usize, cell: &str) -> Result<f64, CliError> {
    cell.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| csv_error(path, format!("row {row}, column {col}: `{cell}` is not a finite number")))
}

/// Reads a dataset CSV, returning the data and the predictor names.
pub fn read_dataset(path: &Path) -> Result<(Dataset, Vec<String>), CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.get(0).map(str::trim) != Some("y") {
        return Err(csv_error(path, "first column must be named `y`"));
    }
    let names: Vec<String> = header.iter().skip(1).map(|s| s.trim().to_string()).collect();
    let mut y = Vec::new();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let values: Vec<f64> =
            record.iter().enumerate().map(|(j, c)| parse_cell(path, i + 1, j, c)).collect::<Result<_, _>>()?;
        y.push(values[0]);
        rows.push(values[1..].to_vec());
    }
    let data = Dataset::from_rows(y, &rows).map_err(|e| csv_error(path, e))?;
    Ok((data, names))
}

pub fn default_names(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("x{j}")).collect()
}

pub fn write_dataset(path: &Path, data: &Dataset, names: &[String]) -> Result<(), CliError> {
    let mut table = Table::new(std::iter::once("y".to_string()).chain(names.iter().cloned()).collect());
    for i in 0..data.n() {
        let mut row = vec![fmt(data.y()[i])];
        row.extend(data.row(i).into_iter().map(fmt));
        table.push(row);
    }
    table.write(path)
}

/// Feature-major expression matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionMatrix {
    pub samples: Vec<String>,
    pub ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

pub fn read_matrix(path: &Path) -> Result<ExpressionMatrix, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let samples: Vec<String> = header.iter().skip(1).map(|s| s.trim().to_string()).collect();
    if samples.is_empty() {
        return Err(csv_error(path, "matrix has no sample columns"));
    }
    let mut ids = Vec::new();
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        ids.push(record.get(0).unwrap_or("").trim().to_string());
        let row: Vec<f64> =
            record.iter().enumerate().skip(1).map(|(j, c)| parse_cell(path, i + 1, j, c)).collect::<Result<_, _>>()?;
        values.push(row);
    }
    if values.is_empty() {
        return Err(csv_error(path, "matrix has no features"));
    }
    Ok(ExpressionMatrix { samples, ids, values })
}

pub fn write_matrix(path: &Path, m: &ExpressionMatrix) -> Result<(), CliError> {
    let mut table = Table::new(std::iter::once("id".to_string()).chain(m.samples.iter().cloned()).collect());
    for (id, row) in m.ids.iter().zip(&m.values) {
        table.push(std::iter::once(id.clone()).chain(row.iter().map(|&v| fmt(v))).collect());
    }
    table.write(path)
}

/// Shortest round-trip decimal form, so outputs are exact and stable.
pub fn fmt(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        format!("{v}")
    }
}

/// An in-memory CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn with_header(header: &[&str]) -> Self {
        Self::new(header.iter().map(|s| s.to_string()).collect())
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        w.write_record(&self.header).map_err(|e| csv_error(path, e))?;
        for row in &self.rows {
            w.write_record(row).map_err(|e| csv_error(path, e))?;
        }
        w.flush().map_err(|e| csv_error(path, e))
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut f = fs::File::create(path).map_err(|e| csv_error(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| csv_error(path, e))
}

pub fn ensure_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| csv_error(path, e))
}
