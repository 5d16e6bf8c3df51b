//! Series CSV files and `key=value` configuration files.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A multichannel series with channel names; rows are time points.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub names: Vec<String>,
    pub data: DMatrix<f64>,
}

impl Series {
    pub fn new(data: DMatrix<f64>) -> Self {
        let names = (1..=data.ncols()).map(|i| format!("X{i}")).collect();
        Series { names, data }
    }
}

/// Header row of names, then one numeric row per time point.
pub fn read_series(path: &Path) -> Result<Series> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    let names: Vec<String> = reader
        .headers()?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    if names.is_empty() {
        return Err(Error::data(format!("{}: no columns", path.display())));
    }
    let mut values = Vec::new();
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != names.len() {
            return Err(Error::data(format!(
                "{}: row {} has {} fields, expected {}",
                path.display(),
                i + 2,
                record.len(),
                names.len()
            )));
        }
        for field in record.iter() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::data(format!(
                    "{}: row {}: '{}' is not a number",
                    path.display(),
                    i + 2,
                    field
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::data(format!(
                    "{}: row {}: non-finite value",
                    path.display(),
                    i + 2
                )));
            }
            values.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::data(format!("{}: no observations", path.display())));
    }
    Ok(Series {
        data: DMatrix::from_row_slice(rows, names.len(), &values),
        names,
    })
}

pub fn write_series(path: &Path, series: &Series) -> Result<()> {
    write_series_to(std::fs::File::create(path)?, series)
}

pub fn write_series_to<W: std::io::Write>(sink: W, series: &Series) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(&series.names)?;
    for row in series.data.row_iter() {
        writer.write_record(row.iter().map(|v| format!("{v}")))?;
    }
    writer.flush()?;
    Ok(())
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::config(format!(
                "config line {}: expected key=value, got '{raw}'",
                n + 1
            ))
        })?;
        out.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}
