//! Output plumbing: CSV emission, the run summary, and rate units.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;

/// Shared state every experiment runner receives.
pub struct RunContext {
    pub out_dir: PathBuf,
    pub bits: bool,
}

impl RunContext {
    /// Convert a rate from nats to the configured reporting unit.
    pub fn rate(&self, nats: f64) -> f64 {
        if self.bits {
            nats / std::f64::consts::LN_2
        } else {
            nats
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

/// Shortest round-tripping decimal text for a float, '.'-separated.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Write a CSV file: header row first, UTF-8, LF line endings.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
    let mut text = String::with_capacity(rows.len() * 32 + 64);
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// What a completed experiment hands back for the summary.
pub struct RunArtifacts {
    pub results: Value,
    pub outputs: Vec<String>,
}

/// The one JSON report every run writes. Everything except
/// `runtime_seconds` is a pure function of (config, version).
#[derive(Serialize)]
pub struct Summary<'a> {
    pub experiment: &'a str,
    pub version: &'a str,
    /// Rate unit of every rate-valued number in the outputs.
    pub units: &'a str,
    pub config: &'a Value,
    pub results: &'a Value,
    pub outputs: &'a [String],
    pub runtime_seconds: f64,
}

pub fn write_summary(path: &Path, summary: &Summary) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
