use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Record of one invocation, written with `--manifest`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub flags: Vec<String>,
    pub seed: Option<u64>,
    pub input_hashes: BTreeMap<String, String>,
    pub tool_version: String,
    pub rng: String,
    pub exit_code: i32,
    pub wall_time_seconds: f64,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing manifest {}", path.display()))
    }
}
