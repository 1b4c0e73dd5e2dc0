//! On-disk formats.
//!
//! * Vectors: one value per line, `#` comments and blank lines ignored, an
//!   optional non-numeric header line.
//! * Null masks: the vector format with `1`/`true` for a null hypothesis and
//!   `0`/`false` for an alternative.
//! * Matrices: dense CSV (p rows of p comma-separated values) or the FDPM
//!   binary container: the bytes `FDPM`, a little-endian `u32` dimension,
//!   then dim² little-endian `f64` entries in row-major order.
//!
//! Reports are written atomically: a temporary file in the target directory
//! is renamed over the destination only once it is complete.

use std::fs;
use std::io::Write;
use std::path::Path;

use fdpvar_core::{CorrelationMatrix, Matrix, PValueVector};

use crate::error::{CliError, CliResult};

pub const FDPM_MAGIC: &[u8; 4] = b"FDPM";

/// Round-trip safe rendering with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::input(path, format!("cannot read: {e}")))
}

fn csv_records(path: &Path, text: &str) -> CliResult<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::input(path, format!("record {}: {e}", i + 1)))?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        out.push(rec.iter().map(str::to_owned).collect());
    }
    Ok(out)
}

fn parse_finite(path: &Path, line: usize, s: &str) -> CliResult<f64> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(CliError::input(path, format!("row {line}: value `{s}` is not finite"))),
        Err(_) => Err(CliError::input(path, format!("row {line}: `{s}` is not a number"))),
    }
}

fn single_column(path: &Path) -> CliResult<Vec<String>> {
    let mut records = csv_records(path, &read_text(path)?)?;
    for (i, r) in records.iter().enumerate() {
        if r.len() != 1 {
            return Err(CliError::input(path, format!("row {}: expected one column, found {}", i + 1, r.len())));
        }
    }
    // A leading non-numeric, non-boolean cell is a header.
    if let Some(first) = records.first() {
        let cell = first[0].to_ascii_lowercase();
        if cell.parse::<f64>().is_err() && !matches!(cell.as_str(), "true" | "false") {
            records.remove(0);
        }
    }
    if records.is_empty() {
        return Err(CliError::input(path, "no values"));
    }
    Ok(records.into_iter().map(|mut r| r.swap_remove(0)).collect())
}

pub fn read_vector(path: &Path) -> CliResult<Vec<f64>> {
    single_column(path)?.iter().enumerate().map(|(i, s)| parse_finite(path, i + 1, s)).collect()
}

/// `true` marks a null hypothesis.
pub fn read_mask(path: &Path) -> CliResult<Vec<bool>> {
    single_column(path)?
        .iter()
        .enumerate()
        .map(|(i, s)| match s.to_ascii_lowercase().as_str() {
            "1" | "true" => Ok(true),
            "0" | "false" => Ok(false),
            _ => Err(CliError::input(path, format!("row {}: `{s}` is not 0/1/true/false", i + 1))),
        })
        .collect()
}

pub fn read_pvalues(path: &Path) -> CliResult<PValueVector> {
    PValueVector::new(read_vector(path)?).map_err(|e| CliError::input(path, e.to_string()))
}

fn decode_fdpm(path: &Path, bytes: &[u8]) -> CliResult<Matrix> {
    if bytes.len() < 8 {
        return Err(CliError::input(path, "truncated FDPM header"));
    }
    let dim = u32::from_le_bytes(bytes[4..8].try_into().expect("4-byte slice")) as usize;
    let expected = dim.checked_mul(dim).and_then(|n| n.checked_mul(8)).and_then(|n| n.checked_add(8));
    if expected != Some(bytes.len()) {
        return Err(CliError::input(
            path,
            format!(
                "FDPM dimension {dim} needs {} bytes, file has {}",
                expected.map_or("overflow".into(), |n| n.to_string()),
                bytes.len()
            ),
        ));
    }
    let data: Vec<f64> =
        bytes[8..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
    if let Some(k) = data.iter().position(|v| !v.is_finite()) {
        return Err(CliError::input(path, format!("entry ({}, {}) is not finite", k / dim, k % dim)));
    }
    Matrix::from_vec(dim, dim, data).map_err(|e| CliError::input(path, e.to_string()))
}

pub fn encode_fdpm(m: &Matrix) -> Vec<u8> {
    assert_eq!(m.rows(), m.cols(), "FDPM stores square matrices");
    let dim = u32::try_from(m.rows()).expect("dimension fits in u32");
    let mut out = Vec::with_capacity(8 + 8 * m.as_slice().len());
    out.extend_from_slice(FDPM_MAGIC);
    out.extend_from_slice(&dim.to_le_bytes());
    for v in m.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn decode_csv_matrix(path: &Path) -> CliResult<Matrix> {
    let records = csv_records(path, &read_text(path)?)?;
    let p = records.len();
    if p == 0 {
        return Err(CliError::input(path, "empty matrix"));
    }
    let mut data = Vec::with_capacity(p * p);
    for (i, r) in records.iter().enumerate() {
        if r.len() != p {
            return Err(CliError::input(
                path,
                format!("row {}: expected {p} entries (square matrix), found {}", i + 1, r.len()),
            ));
        }
        for s in r {
            data.push(parse_finite(path, i + 1, s)?);
        }
    }
    Matrix::from_vec(p, p, data).map_err(|e| CliError::input(path, e.to_string()))
}

pub fn matrix_to_csv(m: &Matrix) -> String {
    let mut s = String::with_capacity(m.as_slice().len() * 24);
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|&v| fmt_f64(v)).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Reads a square matrix, detecting FDPM by its magic bytes.
pub fn read_matrix(path: &Path) -> CliResult<Matrix> {
    let bytes = fs::read(path).map_err(|e| CliError::input(path, format!("cannot read: {e}")))?;
    if bytes.starts_with(FDPM_MAGIC) {
        decode_fdpm(path, &bytes)
    } else {
        decode_csv_matrix(path)
    }
}

pub fn read_correlation(path: &Path) -> CliResult<CorrelationMatrix> {
    CorrelationMatrix::new(read_matrix(path)?).map_err(|e| CliError::input(path, e.to_string()))
}

/// Writes FDPM unless the extension is `.csv`.
pub fn write_matrix(path: &Path, m: &Matrix) -> CliResult<()> {
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        write_atomic(path, matrix_to_csv(m).as_bytes())
    } else {
        write_atomic(path, &encode_fdpm(m))
    }
}

pub fn write_vector(path: &Path, v: &[f64]) -> CliResult<()> {
    let mut s = String::with_capacity(v.len() * 24);
    for &x in v {
        s.push_str(&fmt_f64(x));
        s.push('\n');
    }
    write_atomic(path, s.as_bytes())
}

pub fn write_mask(path: &Path, mask: &[bool]) -> CliResult<()> {
    let s: String = mask.iter().map(|&b| if b { "1\n" } else { "0\n" }).collect();
    write_atomic(path, s.as_bytes())
}

/// Writes via a sibling temporary file and a rename, so readers never see a
/// partial file and a failed run leaves no output behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let fail = |e: std::io::Error| CliError::Output { file: path.display().to_string(), message: e.to_string() };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}
