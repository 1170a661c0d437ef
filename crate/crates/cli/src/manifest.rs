//! `manifest.json` at the root of every run directory: the effective
//! configuration plus a SHA-256 for every artifact written so far.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub started_at: String,
    pub finished_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub created_at: String,
    pub config: RunConfig,
    /// Contents of a custom grammar file, kept so the manifest is
    /// self-contained.
    pub grammar_json: Option<String>,
    pub corpus_sha256: Option<String>,
    pub checkpoint_sha256: Option<String>,
    /// Run-relative path to SHA-256 of the file contents.
    pub artifacts: BTreeMap<String, String>,
    pub stages: Vec<StageRecord>,
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn new(config: RunConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            created_at: now(),
            config,
            grammar_json: None,
            corpus_sha256: None,
            checkpoint_sha256: None,
            artifacts: BTreeMap::new(),
            stages: Vec::new(),
        }
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
    }

    /// The manifest already in `dir`, if any.
    pub fn existing(dir: &Path) -> Result<Option<Self>, CliError> {
        let path = dir.join(MANIFEST_FILE);
        if path.exists() {
            Self::read(&path).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }

    pub fn record_artifact(&mut self, rel: &str, sha256: String) {
        self.artifacts.insert(rel.to_string(), sha256);
    }

    pub fn forget_artifact(&mut self, rel: &str) {
        self.artifacts.remove(rel);
    }

    pub fn record_stage(&mut self, stage: &str, started_at: String) {
        self.stages.push(StageRecord { stage: stage.to_string(), started_at, finished_at: now() });
    }
}
