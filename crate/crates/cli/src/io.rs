//! Strict CSV ingestion and document output.
//!
//! Input CSV: UTF-8, comma-separated, `.` decimal point, first row is a
//! header unless told otherwise. Ragged rows and non-finite values are
//! rejected with line/column diagnostics.

use wishroot::nalgebra::DMatrix;
use std::fmt;
use std::path::Path;
use wishroot::DataMatrix;

/// A CSV/format problem, distinct from semantic validation errors so the
/// binary can exit with the right code.
#[derive(Debug)]
pub struct ParseError {
    pub path: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}: {}",
            self.path, self.line, self.column, self.message
        )
    }
}

impl std::error::Error for ParseError {}

fn parse_err(path: &Path, line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        path: path.display().to_string(),
        line,
        column,
        message: message.into(),
    }
}

/// Raw parsed CSV: labels plus row-major cells.
struct RawCsv {
    labels: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_raw(path: &Path, has_header: bool) -> Result<RawCsv, ParseError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| parse_err(path, 0, 0, format!("cannot read file: {e}")))?;
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut width = 0usize;

    if has_header {
        let (lineno, header) = lines
            .next()
            .ok_or_else(|| parse_err(path, 1, 1, "empty file"))?;
        labels = header.split(',').map(|s| s.trim().to_string()).collect();
        width = labels.len();
        if labels.iter().any(|l| l.is_empty()) {
            return Err(parse_err(path, lineno + 1, 1, "empty header field"));
        }
    }

    for (lineno, line) in lines {
        let cells: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        if width == 0 {
            width = cells.len();
            if !has_header {
                labels = (1..=width).map(|j| format!("v{j}")).collect();
            }
        }
        if cells.len() != width {
            return Err(parse_err(
                path,
                lineno + 1,
                cells.len().min(width) + 1,
                format!("ragged row: expected {width} fields, found {}", cells.len()),
            ));
        }
        rows.push(cells);
    }
    if rows.is_empty() {
        return Err(parse_err(path, 1, 1, "no data rows"));
    }
    Ok(RawCsv { labels, rows })
}

/// Read a numeric observation matrix.
pub fn read_matrix(path: &Path, has_header: bool) -> Result<DataMatrix, ParseError> {
    let raw = read_raw(path, has_header)?;
    let header_offset = if has_header { 1 } else { 0 };
    let n = raw.rows.len();
    let p = raw.labels.len();
    let mut values = DMatrix::zeros(n, p);
    for (i, row) in raw.rows.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                parse_err(
                    path,
                    i + 1 + header_offset,
                    j + 1,
                    format!("not a number: {cell:?}"),
                )
            })?;
            if !v.is_finite() {
                return Err(parse_err(
                    path,
                    i + 1 + header_offset,
                    j + 1,
                    format!("non-finite value: {cell:?}"),
                ));
            }
            values[(i, j)] = v;
        }
    }
    DataMatrix::new(values, raw.labels)
        .map_err(|e| parse_err(path, 0, 0, e.to_string()))
}

/// Read a single-column CSV of group labels aligned by row order.
pub fn read_groups(path: &Path, has_header: bool) -> Result<Vec<String>, ParseError> {
    let raw = read_raw(path, has_header)?;
    if raw.labels.len() != 1 {
        return Err(parse_err(
            path,
            1,
            2,
            format!(
                "group file must have exactly one column, found {}",
                raw.labels.len()
            ),
        ));
    }
    Ok(raw.rows.into_iter().map(|mut r| r.remove(0)).collect())
}

/// FNV-1a 64-bit content hash, hex encoded.
pub fn fnv1a64_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

/// Identification of one input file for the result document.
#[derive(Debug, serde::Serialize)]
pub struct InputFingerprint {
    pub role: &'static str,
    pub path: String,
    pub rows: usize,
    pub cols: usize,
    pub content_hash: String,
}

pub fn fingerprint(
    role: &'static str,
    path: &Path,
    rows: usize,
    cols: usize,
) -> std::io::Result<InputFingerprint> {
    let bytes = std::fs::read(path)?;
    Ok(InputFingerprint {
        role,
        path: path.display().to_string(),
        rows,
        cols,
        content_hash: format!("fnv1a64:{}", fnv1a64_hex(&bytes)),
    })
}
