//! CSV ingestion for regression data.

use std::path::Path;

use crate::error::{Error, Result};
use crate::Vector;

/// Reads `feature_columns` and `target_column` from a headed CSV file.
///
/// Stops after `row_limit` data rows when given. Errors carry the 1-based file
/// line.
pub fn load_regression_csv(
    path: &Path,
    feature_columns: &[String],
    target_column: &str,
    row_limit: Option<usize>,
) -> Result<(Vec<Vector>, Vector)> {
    let data_err = |line: u64, message: String| Error::Data {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| data_err(0, e.to_string()))?;
    let headers = reader.headers().map_err(|e| data_err(1, e.to_string()))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| data_err(1, format!("unknown column `{name}`")))
    };
    let feature_idx = feature_columns
        .iter()
        .map(|c| column(c))
        .collect::<Result<Vec<_>>>()?;
    let target_idx = column(target_column)?;

    let mut points = Vec::new();
    let mut targets = Vec::new();
    for record in reader.records() {
        if row_limit.is_some_and(|limit| points.len() >= limit) {
            break;
        }
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            data_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |i: usize| -> Result<f64> {
            let raw = record.get(i).unwrap_or("").trim();
            raw.parse::<f64>()
                .map_err(|_| data_err(line, format!("non-numeric cell `{raw}` in column {}", &headers[i])))
        };
        let p = feature_idx.iter().map(|&i| cell(i)).collect::<Result<Vec<_>>>()?;
        targets.push(cell(target_idx)?);
        points.push(Vector::from_vec(p));
    }
    Ok((points, Vector::from_vec(targets)))
}
