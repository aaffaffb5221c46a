//! CSV exchange for 1D signals and their decompositions.
//!
//! Input signals take one sample per row, reading the last field of
//! each record so `time,value` exports work unchanged; a single header
//! row is tolerated. Decompositions write a `imf_1,...,imf_N,residue`
//! table whose float formatting round-trips exactly.

use std::path::Path;

use crate::emd1d::Decomposition1d;
use crate::error::{Error, Result};
use crate::io::write_file_atomic;

/// Reads a signal from CSV, one sample per record (last field). A first
/// row that does not parse as a number is treated as a header.
pub fn read_signal(path: &Path) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut out = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let Some(field) = record.iter().next_back() else {
            continue;
        };
        if field.is_empty() && record.iter().all(|f| f.is_empty()) {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(v) => {
                return Err(Error::NonFinite {
                    context: format!("{}: sample {v} at record {}", path.display(), idx + 1),
                })
            }
            Err(_) if idx == 0 => continue,
            Err(_) => {
                return Err(Error::InvalidInput(format!(
                    "{}: record {} field {field:?} is not a number",
                    path.display(),
                    idx + 1
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptySet {
            context: format!("{} holds no samples", path.display()),
        });
    }
    Ok(out)
}

/// Renders a decomposition as `imf_1,...,imf_N,residue` CSV bytes, one
/// row per sample.
pub fn imfs_to_csv(d: &Decomposition1d) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (1..=d.imfs.len()).map(|k| format!("imf_{k}")).collect();
    header.push("residue".to_string());
    writer.write_record(&header)?;
    for i in 0..d.residue.len() {
        let mut row: Vec<String> = Vec::with_capacity(d.imfs.len() + 1);
        for imf in &d.imfs {
            row.push(format_float(imf[i]));
        }
        row.push(format_float(d.residue[i]));
        writer.write_record(&row)?;
    }
    writer
        .into_inner()
        .map_err(|e| Error::InvalidInput(format!("csv buffer: {e}")))
}

/// Writes [`imfs_to_csv`] output to a file.
pub fn write_imfs(path: &Path, d: &Decomposition1d) -> Result<()> {
    write_file_atomic(path, &imfs_to_csv(d)?)
}

/// Parses a table written by [`write_imfs`] back into columns.
pub fn read_imfs(path: &Path) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)?;
    let n_cols = reader.headers()?.len();
    if n_cols == 0 {
        return Err(Error::EmptySet {
            context: format!("{} has no columns", path.display()),
        });
    }
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); n_cols];
    for record in reader.records() {
        let record = record?;
        if record.len() != n_cols {
            return Err(Error::InvalidInput(format!(
                "{}: row with {} fields, expected {n_cols}",
                path.display(),
                record.len()
            )));
        }
        for (col, field) in cols.iter_mut().zip(record.iter()) {
            col.push(field.parse::<f64>().map_err(|_| {
                Error::InvalidInput(format!(
                    "{}: field {field:?} is not a number",
                    path.display()
                ))
            })?);
        }
    }
    let residue = cols.pop().expect("checked non-empty");
    Ok((cols, residue))
}

/// Shortest representation that parses back to the identical f64; `{}`
/// on f64 already guarantees the round trip, this only marks integral
/// values as floats for other readers.
fn format_float(v: f64) -> String {
    let mut buf = format!("{v}");
    if !buf.contains(['.', 'e', 'n', 'N']) {
        buf.push_str(".0");
    }
    buf
}
