//! Run manifests: which tool version ran what, on which inputs, with which
//! effective configuration.
//!
//! The manifest is the only place holding a timestamp; every report file in
//! the same output directory references it by name, so report bytes stay
//! reproducible run over run.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Effective configuration the command ran with.
    pub config: serde_json::Value,
    /// SHA-256 digest per input file.
    pub inputs: BTreeMap<String, String>,
    pub unix_timestamp: u64,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        RunManifest {
            tool: "impactnorm",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config,
            inputs: BTreeMap::new(),
            unix_timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            warnings: Vec::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> io::Result<()> {
        self.inputs
            .insert(path.display().to_string(), sha256_hex(path)?);
        Ok(())
    }

    pub fn write(&self, out_dir: &Path) -> io::Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(out_dir.join(MANIFEST_FILE), json)
    }
}

pub fn sha256_hex(path: &Path) -> io::Result<String> {
    let bytes = fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}
