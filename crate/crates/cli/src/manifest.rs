//! Run manifest: configuration echo plus content hashes of every input and
//! emitted artifact. Deliberately timestamp-free so identical runs produce
//! identical manifests.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_stage: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub seed: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<FileEntry>,
    pub artifacts: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub fn hash_file(path: &Path) -> std::io::Result<FileEntry> {
    let bytes = std::fs::read(path)?;
    Ok(FileEntry {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
        bytes: bytes.len() as u64,
    })
}

impl Manifest {
    pub fn new(config: &RunConfig) -> Manifest {
        Manifest {
            tool: "coughdet".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            status: "running".into(),
            failed_stage: None,
            error: None,
            seed: config.seed,
            config: serde_json::to_value(config).expect("config serializes"),
            inputs: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn record_input(&mut self, path: &Path) -> std::io::Result<()> {
        self.inputs.push(hash_file(path)?);
        Ok(())
    }

    /// Record an artifact with its path relative to the run directory.
    pub fn record_artifact(&mut self, run_dir: &Path, path: &Path) -> std::io::Result<()> {
        let mut entry = hash_file(path)?;
        if let Ok(rel) = path.strip_prefix(run_dir) {
            entry.path = rel.display().to_string();
        }
        self.artifacts.push(entry);
        Ok(())
    }

    pub fn finish(&mut self) {
        self.artifacts.sort_by(|a, b| a.path.cmp(&b.path));
        self.status = "complete".into();
    }

    pub fn fail(&mut self, stage: &str, error: String) {
        self.artifacts.sort_by(|a, b| a.path.cmp(&b.path));
        self.status = "failed".into();
        self.failed_stage = Some(stage.to_string());
        self.error = Some(error);
    }

    pub fn write(&self, run_dir: &Path) -> std::io::Result<PathBuf> {
        let path = run_dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(self).expect("manifest"))?;
        Ok(path)
    }

    /// Re-hash every listed artifact; returns the paths whose content no
    /// longer matches.
    pub fn verify(&self, run_dir: &Path) -> std::io::Result<Vec<String>> {
        let mut broken = Vec::new();
        for entry in &self.artifacts {
            let path = run_dir.join(&entry.path);
            match std::fs::read(&path) {
                Ok(bytes) => {
                    if sha256_hex(&bytes) != entry.sha256 {
                        broken.push(entry.path.clone());
                    }
                }
                Err(_) => broken.push(entry.path.clone()),
            }
        }
        Ok(broken)
    }
}
