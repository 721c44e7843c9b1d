//! File formats.
//!
//! Binary matrices: the 4 bytes `DPMG`, a little-endian `u32` version (1), `u64`
//! rows, `u64` cols, then `rows * cols` little-endian `f64` values in row-major
//! order. Categorical CSV: one nonnegative integer per line, no header.

use std::fs::{File, OpenOptions};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::fail::{CliError, Kind};

const MAGIC: &[u8; 4] = b"DPMG";
const VERSION: u32 = 1;

#[derive(Debug)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

fn data_err(path: &Path, m: impl std::fmt::Display) -> CliError {
    CliError::new(Kind::Dataset, format!("{}: {m}", path.display()))
}

pub fn read_matrix(path: &Path) -> Result<Matrix, CliError> {
    let mut buf = Vec::new();
    File::open(path).and_then(|f| BufReader::new(f).read_to_end(&mut buf)).map_err(|e| data_err(path, e))?;
    if buf.len() < 24 || &buf[..4] != MAGIC {
        return Err(data_err(path, "not a DPMG matrix file"));
    }
    let version = u32::from_le_bytes(buf[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(data_err(path, format!("unsupported matrix version {version}")));
    }
    let rows = u64::from_le_bytes(buf[8..16].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(buf[16..24].try_into().unwrap()) as usize;
    let body = &buf[24..];
    let want = rows.checked_mul(cols).and_then(|n| n.checked_mul(8));
    if want != Some(body.len()) {
        return Err(data_err(path, format!("header says {rows} x {cols} but the payload has {} bytes", body.len())));
    }
    let data: Vec<f64> = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(data_err(path, "matrix has non-finite entries"));
    }
    Ok(Matrix { rows, cols, data })
}

#[cfg(test)]
pub fn write_matrix(path: &Path, rows: usize, cols: usize, data: &[f64]) -> std::io::Result<()> {
    assert_eq!(rows * cols, data.len());
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(rows as u64).to_le_bytes())?;
    w.write_all(&(cols as u64).to_le_bytes())?;
    for v in data {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()
}

pub fn read_categorical(path: &Path) -> Result<Vec<usize>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| data_err(path, e))?;
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| data_err(path, e))?;
        if rec.len() != 1 {
            return Err(data_err(path, format!("line {}: expected one field, got {}", line + 1, rec.len())));
        }
        let v = rec[0]
            .parse::<usize>()
            .map_err(|e| data_err(path, format!("line {}: '{}': {e}", line + 1, &rec[0])))?;
        out.push(v);
    }
    Ok(out)
}

pub fn write_categorical(path: &Path, samples: &[usize]) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for s in samples {
        writeln!(w, "{s}")?;
    }
    w.flush()
}

/// One line of results.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub trial: usize,
    pub n: usize,
    pub algorithm: String,
    pub mode: String,
    pub metric: String,
    pub metric_value: f64,
    pub inner_error_bound: f64,
    pub samples_used: usize,
    pub steps_run: usize,
    pub vertex_draws: u64,
    pub wall_time_ms: u64,
    pub seed: u64,
    pub plan_json: String,
}

pub const COLUMNS: &str =
    "trial,n,algorithm,mode,metric,metric_value,inner_error_bound,samples_used,steps_run,vertex_draws,wall_time_ms,seed,plan_json";

/// Appends records, writing the header only when the file is new or empty.
pub fn append_records(path: &Path, records: &[RunRecord]) -> Result<(), CliError> {
    let file = OpenOptions::new().create(true).append(true).open(path).map_err(|e| CliError::io("open output", e))?;
    let fresh = file.metadata().map_err(|e| CliError::io("stat output", e))?.len() == 0;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(BufWriter::new(file));
    for r in records {
        w.serialize(r).map_err(|e| CliError::new(Kind::Io, format!("write output: {e}")))?;
    }
    w.flush().map_err(|e| CliError::io("flush output", e))
}

/// Sibling metadata path: `out.csv` becomes `out.csv.meta.json`.
pub fn meta_path(out: &Path) -> std::path::PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    s.into()
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::new(Kind::Io, e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(&format!("write {}", path.display()), e))
}
