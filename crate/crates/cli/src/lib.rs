//! Config-driven experiments on threshold states, written as reproducible
//! bundles (CSV tables, SVG plots, a log and a hashed manifest).

// NaN must fail these guards, so `!(x > 0.0)` is the intended form.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bundle;
pub mod config;
pub mod error;
pub mod plot;
pub mod runner;
pub mod table;

use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::LabError;

/// Worker count for the parallel parts of a run.
pub const WORKERS_ENV: &str = "THRESHOLD_LAB_WORKERS";

/// Sizes the global thread pool from [`WORKERS_ENV`] when set. Results do not
/// depend on the worker count.
pub fn init_workers() -> Result<Option<usize>, LabError> {
    let Ok(v) = std::env::var(WORKERS_ENV) else {
        return Ok(None);
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| LabError::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}")))?;
    // a second initialisation in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(Some(n))
}

/// Where the bundle goes: the command-line override, else the config's
/// `output_dir`, else `runs/<kind>`.
pub fn output_dir(cfg: &ExperimentConfig, flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(cfg.kind().as_str()))
}

/// Load, validate, run and write. A bundle is written only when the run
/// itself succeeds; failed checks are reported after it is on disk.
pub fn execute(config_path: &Path, requested: Option<ExperimentKind>, out: Option<&Path>) -> Result<(PathBuf, serde_json::Value), LabError> {
    let cfg = ExperimentConfig::load(config_path)?.resolve(requested)?;
    let dir = output_dir(&cfg, out);
    let bundle = runner::run(&cfg)?;
    let manifest = bundle::write_bundle(&dir, &cfg, &bundle)?;
    if !bundle.failures.is_empty() {
        return Err(LabError::Verification(format!("{} (bundle at {})", bundle.failures.join(", "), dir.display())));
    }
    Ok((dir, manifest))
}
