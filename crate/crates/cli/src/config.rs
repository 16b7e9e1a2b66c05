//! Settings resolution: command-line flag, then environment, then the
//! `--config` TOML file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

/// Keys accepted in the config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub store: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub bind: Option<String>,
    /// `error`, `warn`, `info`, `debug` or `trace`.
    pub log: Option<String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("config {}: {}", path.display(), crate::io_reason(&e))))?;
        toml::from_str(&text).map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
    }
}

/// Effective settings; fields are `None` when no source set them.
#[derive(Debug, Default)]
pub struct Settings {
    pub store: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub bind: Option<String>,
    pub log: Option<String>,
}

impl Settings {
    /// `flag_*` values already include the environment (clap reads it).
    pub fn resolve(
        file: FileConfig,
        flag_store: Option<PathBuf>,
        flag_graph: Option<PathBuf>,
        flag_bind: Option<String>,
    ) -> Self {
        Self {
            store: flag_store.or(file.store),
            graph: flag_graph.or(file.graph),
            bind: flag_bind.or(file.bind),
            log: file.log,
        }
    }

    pub fn store(&self) -> Result<&Path, CliError> {
        self.store
            .as_deref()
            .ok_or_else(|| CliError::usage("no store configured (use --store, ESID_STORE or the config file)"))
    }
}
