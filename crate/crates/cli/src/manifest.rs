//! The run manifest: config snapshot, per-repeat seeds, artifact paths,
//! elapsed time and library version, written as flat `key=value` text.

use crate::config::ExperimentConfig;
use anyhow::{Context, Result};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config: Vec<(String, String)>,
    pub repeat_seeds: Vec<u64>,
    pub artifacts: Vec<PathBuf>,
    pub elapsed_seconds: f64,
    pub version: String,
    /// `None` means success; otherwise the failure description.
    pub failure: Option<String>,
    pub path: PathBuf,
}

impl RunManifest {
    pub fn new(cfg: &ExperimentConfig, out_dir: &Path) -> Self {
        Self {
            config: cfg.snapshot(),
            repeat_seeds: Vec::new(),
            artifacts: Vec::new(),
            elapsed_seconds: 0.0,
            version: env!("CARGO_PKG_VERSION").to_string(),
            failure: None,
            path: out_dir.join("manifest.txt"),
        }
    }

    pub fn is_success(&self) -> bool {
        self.failure.is_none()
    }

    pub fn write(&self) -> Result<()> {
        let mut artifacts = self.artifacts.clone();
        artifacts.sort();
        let mut f = std::fs::File::create(&self.path)
            .with_context(|| format!("cannot create {}", self.path.display()))?;
        writeln!(f, "version={}", self.version)?;
        writeln!(
            f,
            "status={}",
            match &self.failure {
                None => "ok".to_string(),
                Some(msg) => format!("failed: {msg}"),
            }
        )?;
        writeln!(f, "elapsed_seconds={}", self.elapsed_seconds)?;
        for (k, v) in &self.config {
            writeln!(f, "config.{k}={v}")?;
        }
        for (i, seed) in self.repeat_seeds.iter().enumerate() {
            writeln!(f, "seed.repeat{i}={seed}")?;
        }
        for a in &artifacts {
            writeln!(f, "artifact={}", a.display())?;
        }
        Ok(())
    }
}
