//! Deterministic CSV/JSON writers for scenario runs.
//!
//! Floats are printed with 17 significant digits so values round-trip
//! exactly; no timestamps or other run-dependent fields are emitted, making
//! repeated runs byte-identical.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Result, TfrwError};

/// `{:.16e}` keeps 17 significant digits: exact f64 round-trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut buf = String::new();
    buf.push_str(&header.join(","));
    buf.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        buf.push_str(&cells.join(","));
        buf.push('\n');
    }
    write_atomic(path, buf.as_bytes())
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| TfrwError::InvalidArgument(format!("serialization failed: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)
            .map_err(|e| TfrwError::InvalidArgument(format!("cannot create {dir:?}: {e}")))?;
    }
    let mut file = fs::File::create(path)
        .map_err(|e| TfrwError::InvalidArgument(format!("cannot write {path:?}: {e}")))?;
    file.write_all(bytes)
        .map_err(|e| TfrwError::InvalidArgument(format!("cannot write {path:?}: {e}")))?;
    Ok(())
}
