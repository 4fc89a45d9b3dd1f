//! On-disk formats: symbol CSV with a JSON parameter sidecar, and the
//! binary measurement-matrix file.
//!
//! Matrix file layout (bit-exact): one ASCII header line
//! `RIPMAT 1 <M> <N> <provenance>\n` followed by `M*N` little-endian IEEE-754
//! doubles in row-major order.

use crate::error::{Error, Result};
use crate::matrix::{MeasurementMatrix, Provenance};
use crate::symbols::{PpmParams, Symbol, SymbolSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

const MATRIX_MAGIC: &str = "RIPMAT";
const MATRIX_VERSION: u32 = 1;

/// Sidecar path for a symbol CSV: the same stem with `params.json`.
pub fn params_sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("params.json")
}

/// Write one row per symbol (N comma-separated samples) plus the JSON
/// sidecar of the generation parameters. Floats use shortest round-trip
/// formatting, so reading the set back reproduces it exactly.
pub fn write_symbols_csv(set: &SymbolSet, csv_path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(csv_path)?);
    for s in &set.symbols {
        let mut first = true;
        for v in &s.samples {
            if !first {
                out.write_all(b",")?;
            }
            write!(out, "{v}")?;
            first = false;
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    let sidecar = params_sidecar_path(csv_path);
    let json = serde_json::to_string_pretty(&set.params)
        .map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(sidecar, json)?;
    Ok(())
}

/// Read a symbol CSV along with its parameter sidecar and rebuild the set,
/// validating sample counts and support placement.
pub fn read_symbols_csv(csv_path: &Path) -> Result<SymbolSet> {
    let sidecar = params_sidecar_path(csv_path);
    let params: PpmParams = serde_json::from_str(&std::fs::read_to_string(&sidecar)?)
        .map_err(|e| Error::Format(format!("{}: {e}", sidecar.display())))?;
    params.validate()?;
    let reader = BufReader::new(File::open(csv_path)?);
    let mut symbols = Vec::new();
    for (row, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let samples: Vec<f64> = line
            .split(',')
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Format(format!("row {}: bad sample `{v}`", row + 1)))
            })
            .collect::<Result<_>>()?;
        if samples.len() != params.n_samples {
            return Err(Error::Format(format!(
                "row {}: {} samples, expected {}",
                row + 1,
                samples.len(),
                params.n_samples
            )));
        }
        let start = row * params.position_step;
        symbols.push(Symbol {
            index: row + 1,
            samples,
            support: start..start + params.pulse_width,
        });
    }
    if symbols.len() != params.n_symbols {
        return Err(Error::Format(format!(
            "{} rows, expected {}",
            symbols.len(),
            params.n_symbols
        )));
    }
    for s in &symbols {
        for (pos, &v) in s.samples.iter().enumerate() {
            if !s.support.contains(&pos) && v != 0.0 {
                return Err(Error::Format(format!(
                    "symbol {}: nonzero sample outside support at {pos}",
                    s.index
                )));
            }
        }
    }
    Ok(SymbolSet { params, symbols })
}

pub fn write_matrix(phi: &MeasurementMatrix, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(
        out,
        "{MATRIX_MAGIC} {MATRIX_VERSION} {} {} {}",
        phi.rows(),
        phi.cols(),
        phi.provenance
    )?;
    for v in phi.entries() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<MeasurementMatrix> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let fields: Vec<&str> = header.trim_end_matches('\n').split(' ').collect();
    if fields.len() != 5 || fields[0] != MATRIX_MAGIC {
        return Err(Error::Format("bad matrix header".into()));
    }
    let version: u32 = fields[1]
        .parse()
        .map_err(|_| Error::Format("bad version".into()))?;
    if version != MATRIX_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let rows: usize = fields[2]
        .parse()
        .map_err(|_| Error::Format("bad row count".into()))?;
    let cols: usize = fields[3]
        .parse()
        .map_err(|_| Error::Format("bad column count".into()))?;
    let provenance: Provenance = fields[4].parse()?;
    let mut bytes = vec![0u8; rows * cols * 8];
    reader.read_exact(&mut bytes).map_err(|_| {
        Error::Format(format!("expected {} matrix values", rows * cols))
    })?;
    let mut trailing = [0u8; 1];
    if reader.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after matrix body".into()));
    }
    let entries: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(MeasurementMatrix::from_entries(rows, cols, entries, provenance))
}

/// Read vectors (one per row) for classification.
pub fn read_vectors_csv(path: &Path, expected_len: usize) -> Result<Vec<Vec<f64>>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (row, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(',')
            .map(|s| {
                s.parse()
                    .map_err(|_| Error::Format(format!("row {}: bad value `{s}`", row + 1)))
            })
            .collect::<Result<_>>()?;
        if v.len() != expected_len {
            return Err(Error::Format(format!(
                "row {}: {} values, expected {expected_len}",
                row + 1,
                v.len()
            )));
        }
        out.push(v);
    }
    Ok(out)
}
