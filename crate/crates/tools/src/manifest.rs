use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{ToolError, ToolResult};

/// Provenance record written next to a command's data files as `<output>.manifest.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Fully resolved inputs, defaults included.
    pub config: serde_json::Value,
    pub outputs: Vec<PathBuf>,
    pub tool_version: String,
    /// RFC 3339, UTC.
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, config: &impl Serialize, outputs: Vec<PathBuf>) -> ToolResult<Self> {
        let config = serde_json::to_value(config)
            .map_err(|e| ToolError::Config(format!("cannot snapshot configuration: {e}")))?;
        Ok(Self {
            command: command.into(),
            config,
            outputs,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        })
    }

    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    /// Writes the manifest beside the first output and returns its path.
    pub fn write(&self) -> ToolResult<PathBuf> {
        let first = self
            .outputs
            .first()
            .ok_or_else(|| ToolError::Config("manifest without outputs".into()))?;
        let path = Self::path_for(first);
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, json + "\n").map_err(|e| ToolError::io(&path, e))?;
        Ok(path)
    }
}
