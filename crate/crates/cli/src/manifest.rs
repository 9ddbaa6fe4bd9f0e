//! Run manifests: every output file references the digest of the exact
//! configuration that produced it.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};
use wfi_core::rate::ConstantsPolicy;

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub constants: ConstantsPolicy,
    pub seed: u64,
    pub tool_version: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config_bytes: &[u8], constants: ConstantsPolicy, seed: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(config_bytes);
        let config_digest = format!("{:x}", hasher.finalize());
        RunManifest {
            command: command.to_string(),
            config_digest,
            constants,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
        }
    }
}

/// Collects output files for one run and stamps each with the manifest
/// digest.
pub struct OutputDir {
    dir: PathBuf,
    pub manifest: RunManifest,
}

impl OutputDir {
    pub fn new(dir: &Path, manifest: RunManifest) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            manifest,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes a CSV with the frozen column order; the first line is a
    /// comment carrying the manifest digest.
    pub fn write_csv(
        &mut self,
        name: &str,
        header: &str,
        rows: impl Iterator<Item = String>,
    ) -> Result<(), CliError> {
        let path = self.path(name);
        let mut f = std::fs::File::create(&path)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
        writeln!(f, "# manifest: {}", self.manifest.config_digest)
            .and_then(|_| writeln!(f, "{header}"))
            .map_err(|e| CliError::Io(e.to_string()))?;
        for row in rows {
            writeln!(f, "{row}").map_err(|e| CliError::Io(e.to_string()))?;
        }
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    /// Writes a JSON report with the manifest digest embedded.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.path(name);
        let mut doc = serde_json::to_value(value).map_err(|e| CliError::Io(e.to_string()))?;
        if let serde_json::Value::Object(map) = &mut doc {
            map.insert(
                "manifest_digest".to_string(),
                serde_json::Value::String(self.manifest.config_digest.clone()),
            );
        }
        let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(&path, text + "\n")
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    /// Writes manifest.json itself.
    pub fn finalize(mut self) -> Result<(), CliError> {
        self.manifest.outputs.push("manifest.json".to_string());
        let text = serde_json::to_string_pretty(&self.manifest)
            .map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(self.dir.join("manifest.json"), text + "\n")
            .map_err(|e| CliError::Io(e.to_string()))
    }
}
