use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Write `bytes` to `dir/name` via a temporary file in the same directory.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.join(name).display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.flush().map_err(io)?;
    let target = dir.join(name);
    tmp.persist(&target).map_err(|e| io(e.error))?;
    Ok(target)
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

pub fn csv_bytes<R: Serialize>(header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

pub fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create output directory {}: {e}", dir.display())))
}
