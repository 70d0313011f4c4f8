//! CSV ingestion and the truncation / log transforms.

use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    pub response: Vec<f64>,
    /// Named covariate columns, in the order requested.
    pub covariates: Vec<(String, Vec<f64>)>,
    /// Rows skipped because a used cell was blank or not a number.
    pub dropped: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.response.len()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.covariates
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads the response and the named covariates from a headered CSV file.
pub fn ingest(path: &Path, response: &str, covariates: &[String]) -> Result<Dataset, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Input(format!("bad header row: {e}")))?
        .clone();
    let index = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Input(format!("column '{name}' not found")))
    };
    let response_idx = index(response)?;
    let covariate_idx = covariates.iter().map(|c| index(c)).collect::<Result<Vec<_>, _>>()?;

    let mut data = Dataset {
        response: Vec::new(),
        covariates: covariates.iter().map(|c| (c.clone(), Vec::new())).collect(),
        dropped: 0,
    };
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Input(format!("malformed CSV: {e}")))?;
        let y = record.get(response_idx).and_then(parse_cell);
        let xs: Option<Vec<f64>> = covariate_idx
            .iter()
            .map(|&i| record.get(i).and_then(parse_cell))
            .collect();
        match (y, xs) {
            (Some(y), Some(xs)) => {
                data.response.push(y);
                for ((_, col), x) in data.covariates.iter_mut().zip(xs) {
                    col.push(x);
                }
            }
            _ => data.dropped += 1,
        }
    }
    if data.response.is_empty() {
        return Err(CliError::Input("no usable rows".into()));
    }
    Ok(data)
}

/// Values strictly below `threshold` become 0, then non-zero values are
/// replaced by their natural log when `log` is set.
pub fn transform(values: &[f64], threshold: Option<f64>, log: bool) -> Result<Vec<f64>, CliError> {
    values
        .iter()
        .map(|&y| {
            let y = match threshold {
                Some(t) if y < t => 0.0,
                _ => y,
            };
            if !log || y == 0.0 {
                Ok(y)
            } else if y > 0.0 {
                Ok(y.ln())
            } else {
                Err(CliError::Input(format!("cannot take the log of {y}")))
            }
        })
        .collect()
}
