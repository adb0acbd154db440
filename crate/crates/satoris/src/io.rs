//! CSV persistence for matrices and masks: comma-separated rows, no header,
//! locale-independent decimal point. The writer emits 12 significant digits,
//! enough for a lossless round trip at desk scale.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mask::ObservationMask;
use crate::matrix::DensityMatrix;

/// Formats one value with 12 significant digits.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    format!("{v:.11e}")
}

pub fn write_matrix(path: &Path, m: &DensityMatrix) -> Result<()> {
    let mut out = String::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format_value(m.get(i, j)));
        }
        out.push('\n');
    }
    let mut f = fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<DensityMatrix> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    parse_matrix(&text).map_err(|e| match e {
        Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_matrix(text: &str) -> Result<DensityMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Data(format!("unparseable cell {cell:?} on line {}", lineno + 1)))
            })
            .collect::<Result<_>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Data(format!(
                    "ragged row on line {}: {} cells vs {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Data("empty matrix file".into()));
    }
    let cols = rows[0].len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let nrows = flat.len() / cols;
    if flat.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("matrix file contains NaN or infinite values".into()));
    }
    DensityMatrix::from_rows_vec(nrows, cols, flat)
}

pub fn write_mask(path: &Path, mask: &ObservationMask) -> Result<()> {
    let mut out = String::new();
    for i in 0..mask.rows() {
        for j in 0..mask.cols() {
            if j > 0 {
                out.push(',');
            }
            out.push(if mask.is_observed(i, j) { '1' } else { '0' });
        }
        out.push('\n');
    }
    let mut f = fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

pub fn read_mask(path: &Path) -> Result<ObservationMask> {
    let m = read_matrix(path)?;
    let mut bits = Vec::with_capacity(m.rows() * m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let v = m.get(i, j);
            if v == 0.0 {
                bits.push(false);
            } else if v == 1.0 {
                bits.push(true);
            } else {
                return Err(Error::Data(format!(
                    "mask entry ({i}, {j}) is {v}, expected 0 or 1"
                )));
            }
        }
    }
    ObservationMask::from_bits(m.rows(), m.cols(), bits)
}
