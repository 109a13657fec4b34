//! Dispatch, artifact writing and the run manifest.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cli::config::ExperimentConfig;
use crate::cli::experiments::{execute, Check};
use crate::cli::validate::validate;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub file: String,
    /// Hex SHA-256 of the file contents.
    pub sha256: String,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: ExperimentConfig,
    pub artifacts: Vec<Artifact>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub wall_clock_seconds: f64,
    pub step_counts: BTreeMap<String, u64>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Process exit status: 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

pub fn version_string() -> String {
    format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Validate, run the named experiment, write one CSV per table and the
/// manifest into `output_dir` (which must exist).
pub fn run(config: &ExperimentConfig) -> Result<RunManifest> {
    let diags = validate(config);
    if !diags.is_empty() {
        let text: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
        return Err(Error::Config(text.join("; ")));
    }
    let dir = &config.output_dir;
    if !dir.is_dir() {
        return Err(Error::Config(format!("output directory {} does not exist", dir.display())));
    }
    log::info!("running {} with seed {}", config.experiment, config.seed);
    let start = Instant::now();
    let outcome = execute(config)?;
    let wall_clock_seconds = start.elapsed().as_secs_f64();

    let mut artifacts = Vec::with_capacity(outcome.tables.len());
    for table in &outcome.tables {
        let file = format!("{}.csv", table.name);
        let text = table.to_csv();
        std::fs::write(dir.join(&file), &text)?;
        artifacts.push(Artifact {
            file,
            sha256: hex(&Sha256::digest(text.as_bytes())),
            rows: table.rows.len(),
        });
    }
    for c in &outcome.checks {
        log::info!("{} {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    let manifest = RunManifest {
        version: version_string(),
        config: config.clone(),
        artifacts,
        passed: outcome.passed(),
        checks: outcome.checks,
        wall_clock_seconds,
        step_counts: outcome.steps,
    };
    std::fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}
