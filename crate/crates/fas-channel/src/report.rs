//! Run manifests and table serialisation for the CLI.
//!
//! Every output file gets a JSON sidecar `<out>.manifest.json` recording the
//! command, config, seeds and evaluator parameters; replaying a manifest
//! reproduces Monte-Carlo-dependent outputs byte-for-byte because all
//! samplers are pure functions of `(model, draws, seed)`.

use crate::covariance::FasConfig;
use crate::error::{FasError, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Evaluator knobs that affect output values.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct EvaluatorParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_draws: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replication: Option<usize>,
}

/// Reproducibility sidecar serialised next to every output file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub config: FasConfig,
    pub seeds: Vec<u64>,
    pub evaluator_params: EvaluatorParams,
    pub output_path: String,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(
        command: impl Into<String>,
        config: FasConfig,
        seeds: Vec<u64>,
        evaluator_params: EvaluatorParams,
        output_path: impl Into<String>,
    ) -> Self {
        RunManifest {
            command: command.into(),
            config,
            seeds,
            evaluator_params,
            output_path: output_path.into(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn sidecar_path(output: &Path) -> PathBuf {
        let mut name = output.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        output.with_file_name(name)
    }

    pub fn write_sidecar(&self, output: &Path) -> Result<()> {
        let path = Self::sidecar_path(output);
        let body = serde_json::to_string_pretty(self)
            .map_err(|e| FasError::Construction(format!("manifest serialisation: {e}")))?;
        std::fs::write(&path, body)
            .map_err(|e| FasError::Construction(format!("writing {}: {e}", path.display())))?;
        Ok(())
    }
}

/// Requested output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// A rectangular result table with optional `# key = value` summary lines.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub summary: Vec<(String, f64)>,
}

impl Table {
    pub fn new(columns: Vec<&str>) -> Self {
        Table {
            columns: columns.into_iter().map(String::from).collect(),
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_summary(&mut self, key: impl Into<String>, value: f64) {
        self.summary.push((key.into(), value));
    }

    /// CSV with 17 significant digits, LF line endings, summary lines as
    /// leading `#` comments.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.summary {
            let _ = writeln!(out, "# {k} = {}", fmt_float(*v));
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| fmt_float(*v)).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| FasError::Construction(format!("table serialisation: {e}")))
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => Ok(self.to_csv()),
            OutputFormat::Json => self.to_json(),
        }
    }
}

/// 17 significant digits: round-trips every f64 exactly.
pub fn fmt_float(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v:.16e}")
    }
}
