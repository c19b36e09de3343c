//! Plain-text matrix and vector files.
//!
//! Format: UTF-8, first line `rows,cols`, then one matrix row per line as
//! comma-separated decimal floats. Values are written with Rust's shortest
//! round-trip representation, so a write/read cycle is lossless. A vector
//! is stored as a single column (`M,1`); a single row is also accepted on
//! read.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matcore::DenseMatrix;

pub fn format_matrix(m: &DenseMatrix) -> String {
    let mut out = format!("{},{}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{:?}", m.get(i, j)).expect("writing to a String cannot fail");
        }
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let dims: Vec<usize> = header
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad header `{header}`: {e}")))
        })
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse(format!("header must be `rows,cols`, got `{header}`")));
    };

    let mut entries = Vec::with_capacity(rows * cols);
    let mut seen_rows = 0;
    for (lineno, line) in lines.enumerate() {
        let row: Vec<f64> = line
            .split(',')
            .map(|t| {
                t.trim().parse::<f64>().map_err(|e| {
                    Error::Parse(format!("row {}: bad value `{}`: {e}", lineno + 1, t.trim()))
                })
            })
            .collect::<Result<_>>()?;
        if row.len() != cols {
            return Err(Error::Parse(format!(
                "row {} has {} values, expected {cols}",
                lineno + 1,
                row.len()
            )));
        }
        entries.extend(row);
        seen_rows += 1;
    }
    if seen_rows != rows {
        return Err(Error::Parse(format!("expected {rows} rows, found {seen_rows}")));
    }
    DenseMatrix::from_row_slice(rows, cols, &entries)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_matrix(&text)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    fs::write(path, format_matrix(m))?;
    Ok(())
}

/// Reads a vector stored as an `M × 1` or `1 × M` matrix.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let m = read_matrix(path)?;
    match (m.rows(), m.cols()) {
        (_, 1) => Ok(m.column(0)),
        (1, _) => Ok(m.to_row_major()),
        (r, c) => Err(Error::Parse(format!("expected a vector, found a {r}x{c} matrix"))),
    }
}

pub fn write_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    write_matrix(path, &DenseMatrix::from_row_slice(v.len(), 1, v)?)
}
