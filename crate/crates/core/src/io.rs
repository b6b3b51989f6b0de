//! Matrix and vector files.
//!
//! Binary layout: an 8-byte magic `SLOPEMAT`, `n` and `p` as little-endian
//! `u32`, then `n·p` little-endian `f64` values in row-major order. Vectors
//! are stored as `n × 1` matrices. CSV files hold one comma-separated row
//! per line without a header.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"SLOPEMAT";
const HEADER_LEN: usize = 16;

pub fn encode_matrix(m: &DMatrix<f64>) -> Result<Vec<u8>> {
    let (n, p) = m.shape();
    let n32 = u32::try_from(n).map_err(|_| Error::InvalidArgument(format!("{n} rows do not fit the header")))?;
    let p32 = u32::try_from(p).map_err(|_| Error::InvalidArgument(format!("{p} columns do not fit the header")))?;
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * n * p);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&n32.to_le_bytes());
    out.extend_from_slice(&p32.to_le_bytes());
    for i in 0..n {
        for j in 0..p {
            out.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_matrix(bytes: &[u8]) -> Result<DMatrix<f64>> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err(Error::Parse("missing SLOPEMAT header".into()));
    }
    let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let p = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 8 * n * p {
        return Err(Error::Parse(format!(
            "header says {n}x{p} but the body holds {} bytes",
            body.len()
        )));
    }
    let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    Ok(DMatrix::from_row_iterator(n, p, values))
}

pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut s = String::new();
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

pub fn matrix_from_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e} ({t:?})", lineno + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse(format!(
                    "line {} has {} fields, expected {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty CSV matrix".into()));
    }
    let p = rows[0].len();
    Ok(DMatrix::from_row_iterator(rows.len(), p, rows.into_iter().flatten()))
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Reads a matrix, choosing CSV for a `.csv` extension and the binary
/// format otherwise.
pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    if is_csv(path) {
        matrix_from_csv(&fs::read_to_string(path)?)
    } else {
        decode_matrix(&fs::read(path)?)
    }
}

pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    if is_csv(path) {
        f.write_all(matrix_to_csv(m).as_bytes())?;
    } else {
        f.write_all(&encode_matrix(m)?)?;
    }
    Ok(())
}

/// Reads a vector from a matrix file with one row or one column.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let m = read_matrix(path)?;
    if m.ncols() != 1 && m.nrows() != 1 {
        return Err(Error::Parse(format!("expected a vector, found a {}x{} matrix", m.nrows(), m.ncols())));
    }
    Ok(m.iter().copied().collect())
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    write_matrix(path, &DMatrix::from_column_slice(v.len(), 1, v))
}

/// Parses whitespace-separated numbers.
pub fn parse_text_vector(text: &str) -> Result<Vec<f64>> {
    text.split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, -2.5, 3.0, 0.1, f64::MIN_POSITIVE, 1e300]);
        let bytes = encode_matrix(&m).unwrap();
        assert_eq!(&bytes[..8], MAGIC);
        assert_eq!(bytes.len(), 16 + 48);
        // row-major body
        assert_eq!(f64::from_le_bytes(bytes[24..32].try_into().unwrap()), -2.5);
        assert_eq!(decode_matrix(&bytes).unwrap(), m);
        assert!(decode_matrix(&bytes[..20]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let m = DMatrix::from_row_slice(2, 2, &[0.1, 1.0 / 3.0, -7.0, 1e-20]);
        assert_eq!(matrix_from_csv(&matrix_to_csv(&m)).unwrap(), m);
        assert!(matrix_from_csv("1,2\n3\n").is_err());
    }

    #[test]
    fn files() {
        let dir = tempfile::tempdir().unwrap();
        let v = vec![1.0, 2.0, -3.5];
        for name in ["v.bin", "v.csv"] {
            let path = dir.path().join(name);
            write_vector(&path, &v).unwrap();
            assert_eq!(read_vector(&path).unwrap(), v);
        }
        assert_eq!(parse_text_vector(" 1 2\n-3.5 ").unwrap(), v);
    }
}
