//! CSV and JSON persistence.
//!
//! CSV convention: comma-delimited, header row, numbers rendered with 17
//! significant digits so every f64 round-trips bit-exactly. Matrix files
//! carry columns x1..xp; vector files carry a single named column.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// 17 significant digits: enough to reproduce any f64 exactly on parse.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_text(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Write a matrix with header `prefix1..prefixP`.
pub fn write_matrix_csv(path: impl AsRef<Path>, prefix: &str, m: &DMatrix<f64>) -> Result<()> {
    let header: Vec<String> = (1..=m.ncols()).map(|j| format!("{prefix}{j}")).collect();
    let mut text = header.join(",");
    text.push('\n');
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_float(m[(i, j)])).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    write_text(path, &text)
}

/// Write a single-column vector under the given column name.
pub fn write_vector_csv(path: impl AsRef<Path>, name: &str, v: &DVector<f64>) -> Result<()> {
    let mut text = String::from(name);
    text.push('\n');
    for &x in v.iter() {
        text.push_str(&format_float(x));
        text.push('\n');
    }
    write_text(path, &text)
}

/// Read a numeric CSV with a header row into a matrix.
pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(path, "empty file"))?;
    let ncols = header.split(',').count();
    let mut values = Vec::new();
    let mut nrows = 0usize;
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != ncols {
            return Err(Error::parse(
                path,
                format!(
                    "row {} has {} fields, expected {}",
                    lineno + 2,
                    fields.len(),
                    ncols
                ),
            ));
        }
        for f in fields {
            let v: f64 = f.trim().parse().map_err(|_| {
                Error::parse(path, format!("row {}: cannot parse '{f}'", lineno + 2))
            })?;
            values.push(v);
        }
        nrows += 1;
    }
    if nrows == 0 {
        return Err(Error::parse(path, "no data rows"));
    }
    Ok(DMatrix::from_row_slice(nrows, ncols, &values))
}

/// Read a single-column CSV with a header row.
pub fn read_vector_csv(path: impl AsRef<Path>) -> Result<DVector<f64>> {
    let m = read_matrix_csv(&path)?;
    if m.ncols() != 1 {
        return Err(Error::parse(
            path.as_ref(),
            format!("expected a single column, found {}", m.ncols()),
        ));
    }
    Ok(DVector::from_column_slice(m.column(0).as_slice()))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::parse(path.as_ref(), e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for &v in &[0.1, -1.0 / 3.0, 1e-300, 2.0_f64.sqrt(), 0.0, 1e17] {
            let s = format_float(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn matrix_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = DMatrix::from_fn(4, 3, |i, j| (i as f64 + 1.0) / (j as f64 + 2.0));
        write_matrix_csv(&path, "x", &m).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("x1,x2,x3\n"));
        let back = read_matrix_csv(&path).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn vector_round_trip_and_shape_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("y.csv");
        let v = DVector::from_row_slice(&[0.25, 0.5, 0.75]);
        write_vector_csv(&path, "y", &v).unwrap();
        assert_eq!(read_vector_csv(&path).unwrap(), v);

        let wide = dir.path().join("wide.csv");
        write_matrix_csv(&wide, "x", &DMatrix::zeros(2, 2)).unwrap();
        assert!(read_vector_csv(&wide).is_err());
    }

    #[test]
    fn parse_errors_carry_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "x1,x2\n1.0\n").unwrap();
        match read_matrix_csv(&path) {
            Err(Error::Parse { path: p, message }) => {
                assert!(p.ends_with("bad.csv"));
                assert!(message.contains("row 2"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(
            read_matrix_csv(dir.path().join("missing.csv")),
            Err(Error::Io { .. })
        ));
    }
}
