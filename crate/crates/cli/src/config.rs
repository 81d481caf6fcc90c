use orient_core::dataset::{DifficultyLevel, FillPolicy, SynthKind};
use orient_core::regressor::{BackboneName, LossKind};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: std::path::PathBuf, message: String },
}

/// Settings shared by every subcommand. Each is optional in the file;
/// command-line flags take precedence over file values, and built-in
/// defaults fill whatever is left.
///
/// Paths are deliberately not part of this struct: artifacts record what
/// was computed, not where files lived, so reruns into other directories
/// stay byte-identical.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<DifficultyLevel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<SynthKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub val: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backbone: Option<BackboneName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<LossKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fill: Option<FillPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_step: Option<f64>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($field:ident),+) => {
        CliConfig { $($field: $top.$field.clone().or_else(|| $base.$field.clone())),+ }
    };
}

impl CliConfig {
    /// Reads TOML, or JSON when the extension is `.json` (the form embedded
    /// in artifacts).
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let parsed = if is_json { Self::from_json(&text) } else { Self::from_toml(&text) };
        parsed.map_err(|message| ConfigError::Parse { path: path.to_owned(), message })
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        // artifacts embed `{"command": ..., "settings": {...}}`; accept both
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let settings = value.get("settings").cloned().unwrap_or(value);
        serde_json::from_value(settings).map_err(|e| e.to_string())
    }

    /// `self` with every field that `top` sets replaced.
    pub fn overlay(&self, top: &CliConfig) -> CliConfig {
        overlay!(
            self, top, seed, level, kind, n, size, train, val, test, method, backbone, loss, epochs, batch_size,
            learning_rate, fill, angle_step
        )
    }

    /// JSON recorded into artifacts.
    pub fn provenance(&self, command: &str) -> serde_json::Value {
        serde_json::json!({ "command": command, "settings": self })
    }
}
