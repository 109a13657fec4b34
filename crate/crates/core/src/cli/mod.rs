//! Experiment runner: TOML configs in, CSV tables and a JSON manifest out.
//!
//! Exit statuses: [`EXIT_PASS`] when every in-experiment check passes,
//! [`EXIT_FAIL`] when one fails and [`EXIT_INVALID`] for a config that cannot
//! run.

pub mod config;
pub mod experiments;
pub mod run;
pub mod validate;

pub use config::{ExperimentConfig, ExperimentName, MapName, PsiShape};
pub use experiments::{decay_band, energy_drift, execute, Check, Outcome, Table};
pub use run::{run, version_string, Artifact, RunManifest, MANIFEST_FILE};
pub use validate::{validate, Diagnostic};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
