//! File formats: force tables, CSV tables, JSON reports, field checkpoints and
//! run manifests.
//!
//! Floats in CSV files are written with 17 significant digits, which round-trips
//! every f64 exactly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::model::{ForceDescription, ForceSample, ModelParams};
use crate::nonlinear::HeightField;

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Reads a force table with header `x,y,f1,f2`, rows ordered by x then y.
pub fn read_force_table(path: &Path) -> Result<Vec<ForceSample>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != ["x", "y", "f1", "f2"] {
        return Err(Error::ForceTable(format!(
            "{}: header must be x,y,f1,f2, got {}",
            path.display(),
            header.join(",")
        )));
    }
    let samples = reader.deserialize().collect::<std::result::Result<Vec<ForceSample>, _>>()?;
    if samples.is_empty() {
        return Err(Error::ForceTable(format!("{}: no rows", path.display())));
    }
    Ok(samples)
}

/// Writes a CSV table of floats.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    write_csv_cells(path, header, rows.into_iter().map(|row| row.into_iter().map(fmt_f64).collect()))
}

/// Writes a CSV table of preformatted cells.
pub fn write_csv_cells(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(header)?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        writer.write_record(&row)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Writes pretty-printed JSON followed by a newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Scalar data stored beside a checkpointed field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub step: usize,
    pub eps: f64,
    pub q: f64,
    pub z0: f64,
    pub nw: usize,
    pub nz: usize,
    pub params: ModelParams,
    pub force: ForceDescription,
}

/// Path of the JSON sidecar of a checkpoint CSV.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes the field as CSV `w,z,h` (z in physical units) plus its JSON sidecar.
pub fn write_checkpoint(csv_path: &Path, field: &HeightField, meta: &CheckpointMeta) -> Result<()> {
    let rows = (0..=field.nw).flat_map(|j| (0..=field.nz).map(move |i| vec![field.w(j), field.z(i), field.h[field.idx(j, i)]]));
    write_csv(csv_path, &["w", "z", "h"], rows)?;
    write_json(&sidecar_path(csv_path), meta)
}

/// Loads a checkpoint written by [`write_checkpoint`].
pub fn read_checkpoint(csv_path: &Path) -> Result<(HeightField, CheckpointMeta)> {
    let meta: CheckpointMeta = read_json(&sidecar_path(csv_path))?;
    HeightField::check_grid(meta.nw, meta.nz)?;
    let file = fs::File::open(csv_path).map_err(|e| Error::io(csv_path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != ["w", "z", "h"] {
        return Err(Error::InvalidParameter(format!(
            "{}: header must be w,z,h, got {}",
            csv_path.display(),
            header.join(",")
        )));
    }
    let mut field = HeightField::from_fn(meta.nw, meta.nz, meta.z0, meta.q, &meta.params, |_, _| 0.0)?;
    let expected = (meta.nw + 1) * (meta.nz + 1);
    let mut count = 0;
    for row in reader.deserialize::<(f64, f64, f64)>() {
        let (w, z, h) = row?;
        if count >= expected {
            count += 1;
            continue;
        }
        let (j, i) = (count / (meta.nz + 1), count % (meta.nz + 1));
        let tol = 1e-12 * (1.0 + meta.z0);
        if (w - field.w(j)).abs() > 1e-12 || (z - field.z(i)).abs() > tol {
            return Err(Error::InvalidParameter(format!(
                "{}: row {} is at (w, z) = ({w}, {z}), expected ({}, {})",
                csv_path.display(),
                count + 2,
                field.w(j),
                field.z(i)
            )));
        }
        field.h[count] = h;
        count += 1;
    }
    if count != expected {
        return Err(Error::InvalidParameter(format!(
            "{}: {count} rows for a {} x {} grid ({expected} expected)",
            csv_path.display(),
            meta.nw,
            meta.nz
        )));
    }
    Ok((field, meta))
}

/// Grid sizes used by a run; absent entries do not apply to the command.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GridSizes {
    pub n: Option<usize>,
    pub nw: Option<usize>,
    pub nz: Option<usize>,
}

/// Record of one command run, written beside its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Command-line arguments after the program name.
    pub args: Vec<String>,
    pub config_path: Option<PathBuf>,
    pub config: RunConfig,
    pub grid: GridSizes,
    pub newton_tol: f64,
    pub structural_tol: f64,
    pub threads: usize,
    pub outputs: Vec<PathBuf>,
    pub wall_clock_seconds: f64,
    /// SHA-256 over the bytes of every input file, in the order listed.
    pub input_hash: String,
    pub inputs: Vec<PathBuf>,
    pub exit_code: i32,
    pub error: Option<String>,
    pub version: String,
}

/// SHA-256 of the concatenated contents of `paths`, in hex.
pub fn hash_inputs(paths: &[PathBuf]) -> Result<String> {
    let mut hasher = Sha256::new();
    for path in paths {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    let mut hex = String::with_capacity(64);
    for b in hasher.finalize() {
        hex.push_str(&format!("{b:02x}"));
    }
    Ok(hex)
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}
