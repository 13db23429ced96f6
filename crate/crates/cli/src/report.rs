//! The JSON report written by every subcommand.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

/// Flags that shaped the computation. Timing and paths live elsewhere so
/// that `results` depends on this block alone.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub rel_tol: f64,
    pub fd_step: Option<f64>,
    pub grid: usize,
    pub threads: Option<usize>,
    /// Subcommand specific settings.
    pub extra: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Source {
    /// `catalog` or `file`.
    pub kind: &'static str,
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub command: Vec<String>,
    pub config: RunConfig,
    pub source: Option<Source>,
    pub results: Value,
    /// Files written next to the report, relative to the output directory.
    pub artifacts: Vec<String>,
    pub timing: Timing,
}

impl AnalysisReport {
    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(path, text + "\n")
    }
}
