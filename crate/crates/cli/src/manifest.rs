use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::output::{write_atomic, OutputError};

/// Provenance record written next to every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: Vec<String>,
    pub config_path: String,
    pub config_digest: String,
    pub timestamp: String,
    pub tool_version: String,
    pub seeds: Vec<u64>,
    pub outputs: Vec<String>,
    pub status: String,
    pub notes: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config_path: &Path, config_digest: &str) -> Self {
        Self {
            command: command.to_string(),
            arguments: std::env::args().skip(1).collect(),
            config_path: config_path.display().to_string(),
            config_digest: config_digest.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seeds: Vec::new(),
            outputs: Vec::new(),
            status: "running".to_string(),
            notes: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), OutputError> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        write_atomic(path, text.as_bytes(), true)
    }
}

/// `<out>.manifest.json`.
pub fn default_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".manifest.json");
    PathBuf::from(s)
}
