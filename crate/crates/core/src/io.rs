//! Reading and writing embeddings and distance matrices.
//!
//! Two formats are supported:
//!
//! * `csv`: one row per line, comma-separated decimal reals. For embeddings an optional
//!   header line, a leading id column and a label column (after the id, if any) can be
//!   enabled.
//! * `raw_f64`: a 16-byte header of two little-endian `u64` values `n` and `dim`, then
//!   `n * dim` little-endian IEEE-754 doubles in row-major order. A distance matrix is
//!   stored with `dim == n`.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::pad_and_flatten;
use crate::types::{DistanceMatrix, EmbeddingSet, MetricTag, Violation};

/// Tolerance used when validating a loaded distance matrix.
pub const LOAD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FileFormat {
    Csv,
    RawF64,
}

impl std::str::FromStr for FileFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(FileFormat::Csv),
            "raw_f64" | "raw-f64" => Ok(FileFormat::RawF64),
            other => Err(Error::InvalidArgument(format!("unknown file format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CsvOptions {
    pub header: bool,
    pub id_column: bool,
    pub label_column: bool,
    /// Accept rows of differing length and right-pad them with zeros.
    pub pad: bool,
}

struct CsvTable {
    rows: Vec<Vec<f64>>,
    ids: Vec<String>,
    labels: Vec<String>,
}

fn read_csv(reader: impl Read, options: CsvOptions) -> Result<CsvTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(options.header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let skip = options.id_column as usize + options.label_column as usize;
    let mut table = CsvTable { rows: Vec::new(), ids: Vec::new(), labels: Vec::new() };
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::Parse { line, column: 0, message: e.to_string() }
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() <= skip {
            return Err(Error::Parse {
                line,
                column: record.len() as u64,
                message: format!("expected at least {} fields", skip + 1),
            });
        }
        let mut fields = record.iter();
        if options.id_column {
            table.ids.push(fields.next().unwrap_or_default().to_string());
        }
        if options.label_column {
            table.labels.push(fields.next().unwrap_or_default().to_string());
        }
        let row = fields
            .enumerate()
            .map(|(c, f)| {
                f.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    column: (skip + c + 1) as u64,
                    message: format!("{f:?} is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        table.rows.push(row);
    }
    if table.rows.is_empty() {
        return Err(Error::Format("no data rows".into()));
    }
    Ok(table)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn read_raw(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let mut bytes = Vec::new();
    open(path)?
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_raw(&bytes)
}

/// Decodes a `raw_f64` buffer into `(n, dim, values)`.
pub fn parse_raw(bytes: &[u8]) -> Result<(usize, usize, Vec<f64>)> {
    if bytes.len() < 16 {
        return Err(Error::Format(format!("raw_f64 needs a 16-byte header, got {} bytes", bytes.len())));
    }
    let n = u64::from_le_bytes(bytes[0..8].try_into().expect("8 bytes"));
    let dim = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let count = n
        .checked_mul(dim)
        .and_then(|c| c.checked_mul(8))
        .ok_or_else(|| Error::Format(format!("header {n}x{dim} overflows")))?;
    let payload = &bytes[16..];
    if payload.len() as u64 != count {
        return Err(Error::Format(format!(
            "header announces {n}x{dim} values ({count} bytes) but payload has {} bytes",
            payload.len()
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((n as usize, dim as usize, values))
}

/// Encodes `n x dim` row-major values as `raw_f64`.
pub fn encode_raw(n: usize, dim: usize, values: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + values.len() * 8);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(dim as u64).to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn load_embeddings(path: &Path, format: FileFormat, options: CsvOptions) -> Result<EmbeddingSet> {
    match format {
        FileFormat::Csv => embeddings_from_csv(open(path)?, options),
        FileFormat::RawF64 => {
            let (n, dim, values) = read_raw(path)?;
            EmbeddingSet::from_flat(n, dim, values)
        }
    }
}

pub fn embeddings_from_csv(reader: impl Read, options: CsvOptions) -> Result<EmbeddingSet> {
    let table = read_csv(reader, options)?;
    let width = table.rows[0].len();
    let ragged = table.rows.iter().position(|r| r.len() != width);
    let set = match (ragged, options.pad) {
        (Some(i), false) => {
            return Err(Error::Format(format!(
                "row {} has {} values, row 1 has {width}; pass --pad to zero-pad ragged rows",
                i + 1,
                table.rows[i].len()
            )))
        }
        (_, true) => pad_and_flatten(&table.rows, 0.0)?,
        (None, false) => EmbeddingSet::from_rows(table.rows)?,
    };
    let set = if options.id_column { set.with_ids(table.ids)? } else { set };
    if options.label_column {
        set.with_labels(table.labels)
    } else {
        Ok(set)
    }
}

/// A loaded external matrix and what was done to it.
#[derive(Debug, Clone)]
pub struct LoadedMatrix {
    pub matrix: DistanceMatrix,
    /// Violations found before any coercion.
    pub violations: Vec<Violation>,
    pub symmetrized: bool,
}

/// Loads a matrix tagged [`MetricTag::External`] and validates it at [`LOAD_TOLERANCE`].
///
/// Any violation is an error unless `force` is set, in which case the matrix is replaced
/// by `(D + D^T) / 2` with a zero diagonal. Negative or non-finite entries are always errors.
pub fn load_distance_matrix(path: &Path, format: FileFormat, force: bool) -> Result<LoadedMatrix> {
    let matrix = match format {
        FileFormat::Csv => {
            let table = read_csv(open(path)?, CsvOptions::default())?;
            DistanceMatrix::from_rows(&table.rows, MetricTag::External)?
        }
        FileFormat::RawF64 => {
            let (n, dim, values) = read_raw(path)?;
            if n != dim {
                return Err(Error::Shape(format!("distance matrix must be square, got {n}x{dim}")));
            }
            DistanceMatrix::from_flat(n, values, MetricTag::External)?
        }
    };
    check_loaded(matrix, force)
}

pub fn check_loaded(matrix: DistanceMatrix, force: bool) -> Result<LoadedMatrix> {
    let violations = matrix.validate(LOAD_TOLERANCE);
    if violations.is_empty() {
        return Ok(LoadedMatrix { matrix, violations, symmetrized: false });
    }
    let describe = |v: &[Violation]| {
        let shown: Vec<String> = v.iter().take(5).map(ToString::to_string).collect();
        format!("{} violation(s): {}", v.len(), shown.join("; "))
    };
    if !force {
        return Err(Error::Validation(describe(&violations)));
    }
    let fixed = matrix.symmetrized();
    let remaining = fixed.validate(LOAD_TOLERANCE);
    if !remaining.is_empty() {
        return Err(Error::Validation(describe(&remaining)));
    }
    Ok(LoadedMatrix { matrix: fixed, violations, symmetrized: true })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path.display().to_string(), e))
}

fn write_rows_csv<'a>(path: &Path, rows: impl Iterator<Item = &'a [f64]>) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| Error::io(path.display().to_string(), e);
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", line.join(",")).map_err(io)?;
    }
    out.flush().map_err(io)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn write_embeddings(set: &EmbeddingSet, path: &Path, format: FileFormat) -> Result<()> {
    match format {
        FileFormat::Csv => write_rows_csv(path, set.rows()),
        FileFormat::RawF64 => write_bytes(path, &encode_raw(set.n(), set.dim(), set.as_flat())),
    }
}

pub fn write_distance_matrix(d: &DistanceMatrix, path: &Path, format: FileFormat) -> Result<()> {
    match format {
        FileFormat::Csv => write_rows_csv(path, (0..d.n()).map(|i| d.row(i))),
        FileFormat::RawF64 => write_bytes(path, &encode_raw(d.n(), d.n(), d.as_flat())),
    }
}
