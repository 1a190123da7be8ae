use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "a2zeta/1";

/// Provenance record embedded in every output.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub schema: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: Value,
    pub seeds: Vec<u64>,
    pub input_hashes: BTreeMap<String, String>,
    pub wall_time: f64,
}

impl RunManifest {
    pub fn new(command: &str, config: &impl Serialize) -> Result<Self> {
        Ok(RunManifest {
            schema: SCHEMA,
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config: serde_json::to_value(config)?,
            seeds: Vec::new(),
            input_hashes: BTreeMap::new(),
            wall_time: 0.0,
        })
    }

    /// Reads a file, recording its SHA-256.
    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let digest = Sha256::digest(&bytes);
        self.input_hashes
            .insert(path.display().to_string(), format!("{digest:x}"));
        Ok(bytes)
    }
}

/// Where results go: a file or stdout.
pub struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    pub fn new(path: Option<PathBuf>) -> Self {
        Sink { path }
    }

    pub fn write_json(&self, manifest: &RunManifest, result: Value) -> Result<()> {
        let doc = json!({ "manifest": manifest, "result": result });
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        self.write_bytes(text.as_bytes())
    }

    /// CSV rows preceded by `#` comment lines carrying the manifest.
    pub fn write_csv(&self, manifest: &RunManifest, table: Vec<u8>) -> Result<()> {
        let mut out = Vec::new();
        writeln!(out, "# manifest: {}", serde_json::to_string(manifest)?)?;
        out.extend(table);
        self.write_bytes(&out)
    }

    fn write_bytes(&self, bytes: &[u8]) -> Result<()> {
        match &self.path {
            Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(bytes)?;
                Ok(stdout.flush()?)
            }
        }
    }
}
