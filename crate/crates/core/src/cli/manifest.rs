use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

/// Provenance record attached to every written artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub seed: u64,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub tool_version: String,
}

pub(crate) fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

impl RunManifest {
    pub fn start(command: &str, config: &impl Serialize, seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            config: serde_json::to_value(config).unwrap_or(serde_json::Value::Null),
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed,
            started_unix_ms: now_ms(),
            finished_unix_ms: 0,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn input(mut self, path: &Path) -> Self {
        self.inputs.push(path.display().to_string());
        self
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.outputs.push(path.display().to_string());
        self
    }

    pub fn finish(mut self) -> Self {
        self.finished_unix_ms = now_ms();
        self
    }
}

/// `<artifact>.manifest.json` next to the artifact.
pub fn manifest_path(artifact: &Path) -> std::path::PathBuf {
    let mut name = artifact.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    artifact.with_file_name(name)
}
