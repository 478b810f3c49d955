use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;
use crate::hashing::sha256_hex;

#[derive(Debug, Serialize)]
pub struct Artifact {
    pub file: String,
    pub rows: usize,
    pub sha256: String,
}

/// A directory of CSV artifacts, each recorded with its hash.
pub struct Bundle {
    dir: PathBuf,
    pub artifacts: Vec<Artifact>,
}

impl Bundle {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    pub fn csv(&mut self, file: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let path = self.dir.join(file);
        let fail = |e: csv::Error| CliError::io(&path, e);
        w.write_record(header).map_err(fail)?;
        for row in &rows {
            w.write_record(row).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::io(&path, e))?;
        self.raw(file, &bytes, rows.len())
    }

    pub fn raw(&mut self, file: &str, bytes: &[u8], rows: usize) -> Result<(), CliError> {
        write_atomic(&self.dir.join(file), bytes)?;
        self.artifacts.push(Artifact {
            file: file.to_string(),
            rows,
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn manifest(&self, value: &serde_json::Value) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("manifest serialises");
        text.push('\n');
        write_atomic(&self.dir.join("manifest.json"), text.as_bytes())
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes).map_err(|e| CliError::io(path, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub fn num(v: f64) -> String {
    v.to_string()
}
