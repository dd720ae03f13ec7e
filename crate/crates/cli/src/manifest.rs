//! `run-manifest.json`: what a run read, how it was configured, and what
//! it wrote.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;
use crate::io;

pub const FILE_NAME: &str = "run-manifest.json";

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prompts: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub null_checks: Option<Vec<String>>,
    /// Input path as given -> SHA-256 of its bytes.
    pub inputs: BTreeMap<String, String>,
    /// Output file name -> SHA-256 of its bytes.
    pub outputs: BTreeMap<String, String>,
    #[serde(skip)]
    out_dir: PathBuf,
}

impl Manifest {
    pub fn new<C: Serialize>(command: &'static str, config: &C, out_dir: &Path) -> Self {
        Manifest {
            tool: "sift",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config: serde_json::to_value(config).unwrap_or(Value::Null),
            seed: None,
            prompts: None,
            null_checks: None,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            out_dir: out_dir.to_path_buf(),
        }
    }

    /// Reads an input file, recording its digest.
    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = io::read(path)?;
        self.inputs.insert(path.display().to_string(), io::sha256_hex(&bytes));
        Ok(bytes)
    }

    pub fn record_input(&mut self, name: String, digest: String) {
        self.inputs.insert(name, digest);
    }

    /// Writes an output atomically, recording its digest.
    pub fn write_output(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        io::write_atomic(path, bytes)?;
        let name = path
            .strip_prefix(&self.out_dir)
            .unwrap_or(path)
            .display()
            .to_string();
        self.outputs.insert(name, io::sha256_hex(bytes));
        Ok(())
    }

    pub fn finish(self, explicit: Option<&Path>) -> Result<(), CliError> {
        let path = explicit.map_or_else(|| self.out_dir.join(FILE_NAME), Path::to_path_buf);
        io::write_atomic(&path, &io::to_pretty_json(&self)?)
    }
}

/// Directory an output file lives in.
pub fn dir_of(path: &Path) -> PathBuf {
    match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    }
}
