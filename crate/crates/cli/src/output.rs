//! Output sinks and the run manifest that accompanies every output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use jm_core::optimizer::OptimizerConfig;
use serde::Serialize;

use crate::failure::Outcome;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub inputs: Vec<String>,
    pub config: OptimizerConfig,
    pub seed: u64,
    pub tool_version: &'static str,
    pub threads: usize,
    pub wall_time_seconds: f64,
}

pub struct Run {
    started: Instant,
    out: Option<PathBuf>,
    inputs: Vec<String>,
    config: OptimizerConfig,
}

impl Run {
    pub fn new(out: Option<PathBuf>, config: OptimizerConfig) -> Self {
        Self { started: Instant::now(), out, inputs: Vec::new(), config }
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.display().to_string());
    }

    /// Writes the payload to `--out` (or stdout), then the manifest to
    /// `<out>.manifest.json` (or stderr).
    pub fn finish(self, payload: &[u8]) -> Outcome<()> {
        let manifest = RunManifest {
            command: std::env::args().collect(),
            inputs: self.inputs,
            seed: self.config.seed,
            config: self.config,
            tool_version: env!("CARGO_PKG_VERSION"),
            threads: rayon::current_num_threads(),
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
        };
        let manifest = serde_json::to_string_pretty(&manifest)?;
        match self.out {
            Some(path) => {
                fs::write(&path, payload)?;
                let mut side = path.into_os_string();
                side.push(".manifest.json");
                fs::write(side, manifest + "\n")?;
            }
            None => {
                std::io::stdout().write_all(payload)?;
                eprintln!("{manifest}");
            }
        }
        Ok(())
    }
}

pub fn json(value: &impl Serialize) -> Outcome<Vec<u8>> {
    let mut text = serde_json::to_vec_pretty(value)?;
    text.push(b'\n');
    Ok(text)
}

/// Shortest round-trip decimal, with an exponent for very small or large
/// magnitudes; empty for a missing value.
pub fn float(x: Option<f64>) -> String {
    x.map(|v| format!("{v:?}")).unwrap_or_default()
}
