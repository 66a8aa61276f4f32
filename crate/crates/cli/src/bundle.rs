//! Output bundles: tables, plots, a log and a manifest, written to a scratch
//! directory next to the target and renamed into place only when complete.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::LabError;
use crate::table::Table;

pub const MANIFEST: &str = "manifest.json";
pub const LOG: &str = "log.txt";

/// Everything a run produces, before it touches the disk.
#[derive(Debug, Default)]
pub struct Bundle {
    pub tables: Vec<Table>,
    /// `(file stem, svg text)`.
    pub plots: Vec<(String, String)>,
    pub log: Vec<String>,
    pub warnings: Vec<String>,
    pub result: Value,
    /// Names of failed checks; a non-empty list makes the run exit with code 2.
    pub failures: Vec<String>,
}

impl Bundle {
    pub fn log(&mut self, line: impl Into<String>) {
        self.log.push(line.into());
    }

    pub fn warn(&mut self, w: impl Into<String>) {
        let w = w.into();
        self.log.push(format!("warning: {w}"));
        self.warnings.push(w);
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `sha256` of the canonical (key-sorted, compact) JSON of the resolved config.
pub fn config_hash(config: &ExperimentConfig) -> String {
    sha256_hex(&serde_json::to_vec(&config.canonical_json()).expect("json"))
}

/// Manifest without the timestamp, and its hash. Everything in it is a
/// function of the config and the data.
pub fn manifest(config: &ExperimentConfig, bundle: &Bundle, files: &[(String, Vec<u8>)]) -> Value {
    let digest = |name: &str| files.iter().find(|f| f.0 == name).map(|f| sha256_hex(&f.1)).unwrap_or_default();
    let tables: Vec<Value> = bundle
        .tables
        .iter()
        .map(|t| {
            json!({
                "file": t.file_name(),
                "columns": t.columns,
                "rows": t.rows.len(),
                "sha256": digest(&t.file_name()),
            })
        })
        .collect();
    let plots: Vec<Value> = bundle
        .plots
        .iter()
        .map(|(name, _)| {
            let file = format!("{name}.svg");
            json!({ "file": file, "sha256": digest(&file) })
        })
        .collect();
    let mut m = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "kind": config.kind().as_str(),
        "config": config.canonical_json(),
        "config_hash": config_hash(config),
        "tables": tables,
        "plots": plots,
        "log_sha256": digest(LOG),
        "result": bundle.result,
        "warnings": bundle.warnings,
        "failures": bundle.failures,
    });
    let content = sha256_hex(&serde_json::to_vec(&m).expect("json"));
    m["content_hash"] = Value::String(content);
    m
}

fn rendered_files(bundle: &Bundle) -> Result<Vec<(String, Vec<u8>)>, LabError> {
    let mut files = Vec::new();
    for t in &bundle.tables {
        files.push((t.file_name(), t.to_csv()?));
    }
    for (name, svg) in &bundle.plots {
        files.push((format!("{name}.svg"), svg.clone().into_bytes()));
    }
    let mut log = bundle.log.join("\n");
    log.push('\n');
    files.push((LOG.into(), log.into_bytes()));
    Ok(files)
}

fn scratch_path(target: &Path, tag: &str) -> PathBuf {
    let name = target.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "bundle".into());
    target.with_file_name(format!(".{name}.{tag}-{}", std::process::id()))
}

/// Writes the bundle to `dir`, replacing any previous bundle there. Returns
/// the manifest as written (with `created_unix`).
pub fn write_bundle(dir: &Path, config: &ExperimentConfig, bundle: &Bundle) -> Result<Value, LabError> {
    let files = rendered_files(bundle)?;
    let mut m = manifest(config, bundle, &files);
    let now = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    m["created_unix"] = json!(now);

    let dir = if dir.is_absolute() { dir.to_path_buf() } else { std::env::current_dir()?.join(dir) };
    if let Some(parent) = dir.parent() {
        fs::create_dir_all(parent).map_err(|e| LabError::Io(format!("cannot create {}: {e}", parent.display())))?;
    }
    let tmp = scratch_path(&dir, "tmp");
    if tmp.exists() {
        fs::remove_dir_all(&tmp)?;
    }
    let staged = (|| -> Result<(), LabError> {
        fs::create_dir(&tmp)?;
        for (name, bytes) in &files {
            fs::write(tmp.join(name), bytes)?;
        }
        let mut text = serde_json::to_string_pretty(&m).expect("json");
        text.push('\n');
        fs::write(tmp.join(MANIFEST), text)?;
        Ok(())
    })();
    if let Err(e) = staged {
        let _ = fs::remove_dir_all(&tmp);
        return Err(e);
    }

    if dir.exists() {
        let old = scratch_path(&dir, "old");
        fs::rename(&dir, &old).map_err(|e| LabError::Io(format!("cannot move aside {}: {e}", dir.display())))?;
        if let Err(e) = fs::rename(&tmp, &dir) {
            let _ = fs::rename(&old, &dir);
            let _ = fs::remove_dir_all(&tmp);
            return Err(LabError::Io(format!("cannot publish {}: {e}", dir.display())));
        }
        fs::remove_dir_all(&old)?;
    } else if let Err(e) = fs::rename(&tmp, &dir) {
        let _ = fs::remove_dir_all(&tmp);
        return Err(LabError::Io(format!("cannot publish {}: {e}", dir.display())));
    }
    Ok(m)
}
