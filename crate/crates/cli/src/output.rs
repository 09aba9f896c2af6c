//! Buffered output files. Nothing touches the disk until a command has
//! finished, so a failed run leaves no partial results behind.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

pub const TOOL_VERSION: &str = concat!("speclab ", env!("CARGO_PKG_VERSION"));

/// Identification embedded in every output file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stamp {
    pub tool_version: String,
    pub config_fingerprint: String,
}

impl Stamp {
    pub fn new(fingerprint: &str) -> Self {
        Self { tool_version: TOOL_VERSION.to_string(), config_fingerprint: fingerprint.to_string() }
    }
}

/// Fixed-width scientific notation with 17 significant digits.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// CSV table whose rows end with the stamp columns.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    stamp: Stamp,
}

impl Table {
    pub fn new(columns: &[&str], stamp: &Stamp) -> Self {
        let mut header: Vec<String> = columns.iter().map(|c| c.to_string()).collect();
        header.push("config_fingerprint".into());
        header.push("tool_version".into());
        Self { header, rows: Vec::new(), stamp: stamp.clone() }
    }

    pub fn push(&mut self, mut row: Vec<String>) {
        debug_assert_eq!(row.len() + 2, self.header.len());
        row.push(self.stamp.config_fingerprint.clone());
        row.push(self.stamp.tool_version.clone());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| CliError::Output(e.to_string()))
    }
}

#[derive(Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn csv(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        self.files.push((name.to_string(), table.to_bytes()?));
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_vec_pretty(value)?;
        text.push(b'\n');
        self.files.push((name.to_string(), text));
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    /// Writes every file into `dir`; on failure removes what was written.
    pub fn commit(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
        let mut written = Vec::new();
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            if let Err(e) = fs::write(&path, bytes) {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                return Err(CliError::Output(format!("{}: {e}", path.display())));
            }
            written.push(path);
        }
        Ok(written)
    }
}
