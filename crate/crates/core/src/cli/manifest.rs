use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{CliError, ErrorKind, RunConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    /// Path relative to the output directory.
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Written as `manifest.json` next to the outputs of every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub duration_seconds: f64,
    pub outputs: Vec<OutputRecord>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read manifest: {e}")).at(path.display().to_string()))?;
        serde_json::from_str(&text).map_err(|e| CliError::schema(format!("invalid manifest: {e}")).at(path.display().to_string()))
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self).expect("serialisable");
        text.push('\n');
        std::fs::write(&path, text)
            .map_err(|e| CliError::input(format!("cannot write manifest: {e}")).at(path.display().to_string()))?;
        Ok(path)
    }

    /// Every listed output exists in `dir` with the recorded digest.
    pub fn verify(&self, dir: &Path) -> Result<(), CliError> {
        let mut bad = Vec::new();
        for o in &self.outputs {
            match std::fs::read(dir.join(&o.file)) {
                Ok(bytes) if sha256_hex(&bytes) == o.sha256 => {}
                _ => bad.push(o.file.clone()),
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(CliError::new(ErrorKind::Mismatch, format!("outputs differ from the manifest: {}", bad.join(", "))))
        }
    }
}
