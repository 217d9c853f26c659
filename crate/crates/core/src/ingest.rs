//! CSV loading and matrix validation.
//!
//! One sample per row. Row order is kept as-is because it defines the window
//! ordering downstream. Error locations are 1-based (row counts the header
//! line when present, column counts the label column when present).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{DriftError, Result};
use crate::linalg::FeatureMatrix;
use crate::report::fmt_f64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    pub has_header: bool,
    /// 0-based column index dropped before parsing.
    pub label_column: Option<usize>,
    pub delimiter: u8,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            has_header: false,
            label_column: None,
            delimiter: b',',
        }
    }
}

impl CsvOptions {
    pub fn validate(&self) -> Result<()> {
        if !self.delimiter.is_ascii_graphic() && self.delimiter != b'\t' && self.delimiter != b' ' {
            return Err(DriftError::InvalidSpec(format!(
                "delimiter byte {:#04x} is not printable",
                self.delimiter
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationSummary {
    pub rows: usize,
    pub cols: usize,
    pub column_min: Vec<f64>,
    pub column_max: Vec<f64>,
    pub non_finite: usize,
}

/// Check shape and finiteness of row-major data and collect column ranges.
pub fn validate_matrix(rows: usize, cols: usize, data: &[f64]) -> Result<ValidationSummary> {
    if rows == 0 || cols == 0 {
        return Err(DriftError::InvalidShape {
            rows,
            cols,
            reason: "need at least one row and one column",
        });
    }
    if data.len() != rows * cols {
        return Err(DriftError::InvalidShape {
            rows,
            cols,
            reason: "data length does not match shape",
        });
    }
    let mut column_min = vec![f64::INFINITY; cols];
    let mut column_max = vec![f64::NEG_INFINITY; cols];
    let mut first_bad = None;
    let mut non_finite = 0;
    for (idx, &x) in data.iter().enumerate() {
        let c = idx % cols;
        if !x.is_finite() {
            non_finite += 1;
            first_bad.get_or_insert((idx / cols + 1, c + 1));
            continue;
        }
        column_min[c] = column_min[c].min(x);
        column_max[c] = column_max[c].max(x);
    }
    if let Some((row, col)) = first_bad {
        return Err(DriftError::NonFiniteData {
            row,
            col,
            count: non_finite,
        });
    }
    Ok(ValidationSummary {
        rows,
        cols,
        column_min,
        column_max,
        non_finite,
    })
}

pub fn load_csv(path: &Path, opts: &CsvOptions) -> Result<FeatureMatrix> {
    opts.validate()?;
    if !path.exists() {
        return Err(DriftError::FileNotFound(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .delimiter(opts.delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;

    let row_offset = usize::from(opts.has_header);
    let mut width = None;
    let mut data = Vec::new();
    let mut nrows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1 + row_offset;
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(DriftError::RaggedRows {
                row,
                expected,
                found: record.len(),
            });
        }
        for (c, cell) in record.iter().enumerate() {
            if Some(c) == opts.label_column {
                continue;
            }
            let value = cell.parse::<f64>().map_err(|_| DriftError::ParseError {
                row,
                col: c + 1,
                value: cell.to_string(),
            })?;
            data.push(value);
        }
        nrows += 1;
    }
    let Some(width) = width else {
        return Err(DriftError::EmptyFile);
    };
    let cols = match opts.label_column {
        Some(l) if l < width => width - 1,
        Some(l) => {
            return Err(DriftError::InvalidSpec(format!(
                "label column {l} is outside the {width} columns of the file"
            )))
        }
        None => width,
    };
    if cols == 0 {
        return Err(DriftError::EmptyFile);
    }
    FeatureMatrix::new(nrows, cols, data)
}

/// Write a matrix as plain CSV, 17 significant digits per cell.
pub fn write_csv(matrix: &FeatureMatrix, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for row in matrix.rows() {
        let line: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}
