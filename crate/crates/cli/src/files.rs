//! Headerless numeric CSV, binary tensors and JSON reports.

use std::fs;
use std::path::{Path, PathBuf};

use gptcca_core::io::{decode_tensor, encode_tensor};
use gptcca_core::{CpDecomposition, DenseTensor};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Scientific notation with 17 significant digits, enough to round-trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn read_matrix(path: &Path) -> CliResult<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let width = *cols.get_or_insert(record.len());
        if record.len() != width {
            return Err(CliError::input(format!(
                "{}: row {} has {} columns, expected {width}",
                path.display(),
                line + 1,
                record.len()
            )));
        }
        for (col, field) in record.iter().enumerate() {
            let x: f64 = field.parse().map_err(|_| {
                CliError::input(format!(
                    "{}: row {} column {}: {field:?} is not a number",
                    path.display(),
                    line + 1,
                    col + 1
                ))
            })?;
            if !x.is_finite() {
                return Err(CliError::input(format!(
                    "{}: row {} column {}: value is not finite",
                    path.display(),
                    line + 1,
                    col + 1
                )));
            }
            values.push(x);
        }
        rows += 1;
    }
    let cols = cols.unwrap_or(0);
    if rows == 0 || cols == 0 {
        return Err(CliError::input(format!("{}: no data rows", path.display())));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::io(path, source),
        other => CliError::input(format!("{}: {other:?}", path.display())),
    }
}

pub fn matrix_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let fields: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> CliResult<()> {
    write_text(path, &matrix_csv(m))
}

pub fn read_tensor_file(path: &Path) -> CliResult<DenseTensor> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode_tensor(&bytes).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn write_tensor_file(path: &Path, t: &DenseTensor) -> CliResult<()> {
    let bytes = encode_tensor(t)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// `<prefix><suffix>`, e.g. `run/x` + `.mode0.csv`.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Report path next to an output: `model.json` becomes `model.report.json`,
/// an extension-less prefix `run/x` becomes `run/x.report.json`.
pub fn report_path(out: &Path) -> PathBuf {
    match out.extension() {
        Some(_) => out.with_extension("report.json"),
        None => with_suffix(out, ".report.json"),
    }
}

/// Writes `<prefix>.mode<j>.csv` per factor and `<prefix>.weights.csv`.
pub fn write_cp(prefix: &Path, cp: &CpDecomposition) -> CliResult<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (j, u) in cp.factors().iter().enumerate() {
        let path = with_suffix(prefix, &format!(".mode{j}.csv"));
        write_matrix(&path, u)?;
        written.push(path);
    }
    let path = with_suffix(prefix, ".weights.csv");
    let w = DMatrix::from_column_slice(cp.rank(), 1, cp.weights());
    write_matrix(&path, &w)?;
    written.push(path);
    Ok(written)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Prints the report to stdout and writes it to `path`.
pub fn emit_report<T: Serialize>(path: &Path, report: &T) -> CliResult<()> {
    let text = to_json(report);
    write_text(path, &text)?;
    print!("{text}");
    Ok(())
}

pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn from_rows(rows: &[Vec<f64>], what: &str) -> CliResult<DMatrix<f64>> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(CliError::input(format!("{what}: ragged or empty matrix")));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(rows.len(), cols, &flat))
}

pub fn paths_display(paths: &[PathBuf]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_paths() {
        assert_eq!(report_path(Path::new("a/model.json")), PathBuf::from("a/model.report.json"));
        assert_eq!(report_path(Path::new("a/run")), PathBuf::from("a/run.report.json"));
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_round_trip() {
        let dir = std::env::temp_dir().join(format!("gptcca-files-{}", std::process::id()));
        let path = dir.join("m.csv");
        let m = DMatrix::from_row_slice(2, 3, &[1.0, -2.5, 1.0 / 7.0, 0.0, 1e-12, 3.0]);
        write_matrix(&path, &m).unwrap();
        assert_eq!(read_matrix(&path).unwrap(), m);
        fs::remove_dir_all(dir).unwrap();
    }
}
