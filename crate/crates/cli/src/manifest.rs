//! Run manifests: every training, evaluation or sweep run drops a
//! `manifest.json` next to its outputs with the fully resolved
//! configuration, input hashes, seed and timestamps — enough to reproduce
//! the run exactly.

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    /// The full command line as invoked.
    pub argv: Vec<String>,
    pub threads: usize,
    pub seed: Option<u64>,
    pub started_at: String,
    pub finished_at: Option<String>,
    /// Input path -> SHA-256 of the file contents.
    pub inputs: BTreeMap<String, String>,
    /// The configuration after applying all flag overrides.
    pub resolved_config: Option<serde_json::Value>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(threads: usize) -> Self {
        RunManifest {
            tool: "fofe-ner",
            version: env!("CARGO_PKG_VERSION"),
            argv: std::env::args().collect(),
            threads,
            seed: None,
            started_at: chrono::Utc::now().to_rfc3339(),
            finished_at: None,
            inputs: BTreeMap::new(),
            resolved_config: None,
            outputs: Vec::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> anyhow::Result<()> {
        let bytes = std::fs::read(path)
            .with_context(|| format!("hashing input {}", path.display()))?;
        let digest = format!("{:x}", Sha256::digest(&bytes));
        self.inputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    pub fn add_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn set_config<T: Serialize>(&mut self, config: &T) {
        self.resolved_config =
            Some(serde_json::to_value(config).expect("config serializes"));
    }

    /// Stamp the end time and write `manifest.json` into `dir`.
    pub fn write(mut self, dir: &Path) -> anyhow::Result<()> {
        self.finished_at = Some(chrono::Utc::now().to_rfc3339());
        let path = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(&self).expect("manifest serializes");
        std::fs::write(&path, json + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}
