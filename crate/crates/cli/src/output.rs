//! Output emission: one `summary.json` per run plus CSV tables. CSV files
//! carry a header row, UTF-8 text, '.' decimal separators and line-feed
//! terminators.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::CliError;

pub struct OutputWriter {
    dir: PathBuf,
}

impl OutputWriter {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    /// Write `summary.json`: artifact metadata, timestamp, config echo,
    /// results and verdicts. Everything except the timestamp is a pure
    /// function of the config.
    pub fn write_summary(
        &self,
        subcommand: &str,
        config: &RunConfig,
        results: Value,
        verdicts: Value,
    ) -> Result<(), CliError> {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let summary = json!({
            "artifact": {
                "name": "qrf",
                "version": env!("CARGO_PKG_VERSION"),
            },
            "timestamp_unix_s": timestamp,
            "subcommand": subcommand,
            "config": serde_json::to_value(config)
                .map_err(|e| CliError::Config(format!("config echo: {e}")))?,
            "results": results,
            "verdicts": verdicts,
        });
        let text = serde_json::to_string_pretty(&summary)
            .map_err(|e| CliError::Config(format!("summary serialization: {e}")))?;
        self.write_text("summary.json", &(text + "\n"))
    }

    /// Write a CSV table with a header row.
    pub fn write_csv(
        &self,
        name: &str,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> Result<(), CliError> {
        let mut text = String::new();
        text.push_str(&header.join(","));
        text.push('\n');
        for row in rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        self.write_text(name, &text)
    }

    fn write_text(&self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
    }
}

/// Format a float with '.' decimal separator (Rust's `Display` is locale
/// independent and round-trips f64 exactly).
pub fn fmt_f64(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{x:.1}")
    } else {
        format!("{x}")
    }
}

pub fn fmt_coords(c: &[i64]) -> String {
    c.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("x")
}
