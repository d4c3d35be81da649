//! CSV tables and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use invfilter_core::analysis::DecompositionRecord;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

pub const TRAJECTORY_HEADER: [&str; 6] = ["n", "error", "bias_sq", "variance", "mse", "stderr"];
pub const SLOPES_HEADER: [&str; 4] = ["param_set", "predicted_exponent", "fitted_slope", "residual"];
pub const MANIFEST: &str = "manifest.toml";

/// Scientific notation with 16 significant digits, enough to round-trip an `f64`.
pub fn sci(v: f64) -> String {
    format!("{v:.15e}")
}

/// One CSV file held in memory until the run has finished.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub bytes: Vec<u8>,
}

fn table<I, R>(name: impl Into<String>, header: &[&str], rows: I) -> Result<Table, CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(CliError::io)?;
    for row in rows {
        w.write_record(row).map_err(CliError::io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::io(e.into_error()))?;
    Ok(Table { name: name.into(), bytes })
}

pub fn trajectory_table(name: impl Into<String>, records: &[DecompositionRecord]) -> Result<Table, CliError> {
    table(
        name,
        &TRAJECTORY_HEADER,
        records.iter().map(|r| [r.n.to_string(), sci(r.error), sci(r.bias_sq), sci(r.variance), sci(r.mse), sci(r.stderr)]),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeRow {
    pub param_set: String,
    pub predicted_exponent: f64,
    pub fitted_slope: f64,
    pub residual: f64,
}

pub fn slopes_table(rows: &[SlopeRow]) -> Result<Table, CliError> {
    table(
        "slopes.csv",
        &SLOPES_HEADER,
        rows.iter().map(|r| [r.param_set.clone(), sci(r.predicted_exponent), sci(r.fitted_slope), sci(r.residual)]),
    )
}

pub fn text_table(name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<Table, CliError> {
    table(name, header, rows)
}

pub fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Software {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunInfo {
    pub experiment: String,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_s: f64,
    /// Wall time of each part of the run, keyed by label.
    pub parts_s: BTreeMap<String, f64>,
}

/// Everything needed to reproduce a run and check that it did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub software: Software,
    pub run: RunInfo,
    pub config: RunConfig,
    /// SHA-256 of every CSV artifact, keyed by file name.
    pub checksums: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Io(format!("cannot serialize manifest: {e}")))
    }
}

/// A config file is either a plain config or a manifest from an earlier run.
pub enum Source {
    Config(Box<RunConfig>),
    Manifest(Box<RunManifest>),
}

pub fn read_source(path: &Path) -> Result<Source, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let value: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    if value.contains_key("software") && value.contains_key("config") {
        let m: RunManifest = toml::from_str(&text).map_err(|e| CliError::Config(format!("malformed manifest: {e}")))?;
        Ok(Source::Manifest(Box::new(m)))
    } else {
        Ok(Source::Config(Box::new(crate::config::parse(&text)?)))
    }
}

pub fn write_all(dir: &Path, tables: &[Table]) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(CliError::io)?;
    for t in tables {
        fs::write(dir.join(&t.name), &t.bytes).map_err(CliError::io)?;
    }
    Ok(())
}
