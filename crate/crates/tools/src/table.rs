//! Supermode index tables: CSV with header `gap_nm,n_s,n_a`.
//!
//! The wavelength is read from a comment line `# lambda_nm=1550` or passed in
//! by the caller. Other `#` lines are ignored.

use std::path::Path;

use ifm_core::coupler::{CouplerIndexTable, IndexSample};
use ifm_core::Error as CoreError;

use crate::{ToolError, ToolResult};

const COLUMNS: [&str; 3] = ["gap_nm", "n_s", "n_a"];

pub fn load_index_table(
    path: &Path,
    lambda_override_nm: Option<f64>,
) -> ToolResult<CouplerIndexTable> {
    let text = std::fs::read_to_string(path).map_err(|e| ToolError::io(path, e))?;
    parse_index_table(&text, lambda_override_nm).map_err(|e| match e {
        TableError::Row { row, reason } => ToolError::Table {
            path: path.into(),
            row,
            reason,
        },
        TableError::Other(message) => ToolError::Parse {
            path: path.into(),
            message,
        },
    })
}

#[derive(Debug, PartialEq)]
pub enum TableError {
    /// `row` counts data rows from 1, as in the error messages of the core crate.
    Row {
        row: usize,
        reason: String,
    },
    Other(String),
}

pub fn parse_index_table(
    text: &str,
    lambda_override_nm: Option<f64>,
) -> Result<CouplerIndexTable, TableError> {
    let lambda_nm = match lambda_override_nm {
        Some(l) => l,
        None => comment_wavelength(text)?.ok_or_else(|| {
            TableError::Other("no `# lambda_nm=` line and no wavelength given".into())
        })?,
    };

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| TableError::Other(e.to_string()))?
        .clone();
    let mut index = [0usize; 3];
    for (slot, name) in index.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| TableError::Other(format!("missing column `{name}`")))?;
    }

    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| TableError::Row {
            row,
            reason: e.to_string(),
        })?;
        let mut values = [0.0; 3];
        for (v, (&col, name)) in values.iter_mut().zip(index.iter().zip(COLUMNS)) {
            let field = record.get(col).ok_or_else(|| TableError::Row {
                row,
                reason: format!("missing `{name}`"),
            })?;
            *v = field.parse().map_err(|_| TableError::Row {
                row,
                reason: format!("`{name}` is not a number: {field:?}"),
            })?;
        }
        samples.push(IndexSample {
            gap_nm: values[0],
            n_s: values[1],
            n_a: values[2],
        });
    }

    CouplerIndexTable::new(samples, lambda_nm).map_err(|e| match e {
        CoreError::InvalidTable { row, reason } => TableError::Row { row, reason },
        other => TableError::Other(other.to_string()),
    })
}

fn comment_wavelength(text: &str) -> Result<Option<f64>, TableError> {
    for line in text.lines() {
        let Some(comment) = line.trim().strip_prefix('#') else {
            continue;
        };
        let Some((key, value)) = comment.split_once('=') else {
            continue;
        };
        if key.trim() == "lambda_nm" {
            return value
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| TableError::Other(format!("bad lambda_nm value {:?}", value.trim())));
        }
    }
    Ok(None)
}
