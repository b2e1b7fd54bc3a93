//! CSV emission and the run manifest.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Everything needed to reproduce a run's outputs: the subcommand, the full
/// resolved configuration (inline, plus its hash), versions, and timing.
#[derive(Serialize)]
pub struct Manifest {
    pub subcommand: String,
    pub args: Vec<String>,
    pub config_sha256: String,
    pub config_toml: String,
    pub crate_version: String,
    pub wall_time_ms: u128,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(subcommand: &str, args: Vec<String>, config_toml: String) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(config_toml.as_bytes());
        Manifest {
            subcommand: subcommand.into(),
            args,
            config_sha256: format!("{:x}", hasher.finalize()),
            config_toml,
            crate_version: env!("CARGO_PKG_VERSION").into(),
            wall_time_ms: 0,
            outputs: Vec::new(),
        }
    }

    pub fn finish(mut self, out_dir: &Path, wall: Duration) -> anyhow::Result<()> {
        self.wall_time_ms = wall.as_millis();
        let path = out_dir.join("manifest.json");
        let json = serde_json::to_string_pretty(&self)?;
        std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

/// Open a CSV writer in the output directory and record it in the manifest.
pub fn csv_writer(
    out_dir: &Path,
    name: &str,
    manifest: &mut Manifest,
) -> anyhow::Result<csv::Writer<std::fs::File>> {
    let path: PathBuf = out_dir.join(name);
    manifest.outputs.push(name.into());
    csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))
}

/// Format a float with enough digits to round-trip exactly.
pub fn num(x: f64) -> String {
    // Rust's default float Display is already the shortest round-tripping
    // representation; this wrapper just pins NaN/infinity spelling.
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}
