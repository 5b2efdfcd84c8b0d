//! Run manifests: what was run, with which effective settings, and what
//! came out. Written atomically (temp file + rename) so a crashed run never
//! leaves a truncated manifest behind.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::{CliError, CliResult};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    /// The effective configuration after flag/file/default resolution.
    pub config: serde_json::Value,
    /// The bandwidth the run settled on (searched or fixed), if any.
    pub fitted_bandwidth: Option<f64>,
    pub crossings_before: Option<usize>,
    pub crossings_after: Option<usize>,
    pub timings_ms: BTreeMap<String, u64>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
            config,
            fitted_bandwidth: None,
            crossings_before: None,
            crossings_after: None,
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Config(format!("manifest serialization: {e}")))?;
        let tmp = path.with_extension("json.tmp");
        let io_err =
            |e: std::io::Error| CliError::Config(format!("cannot write {}: {e}", path.display()));
        fs::write(&tmp, text.as_bytes()).map_err(io_err)?;
        fs::rename(&tmp, path).map_err(io_err)
    }
}
