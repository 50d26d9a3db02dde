//! Run manifests: a JSON record of the configuration, seeds, derived
//! constants and emitted files of one experiment.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::Config;
use crate::error::Result;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub command: String,
    pub version: String,
    pub config: BTreeMap<String, BTreeMap<String, String>>,
    pub seeds: BTreeMap<String, u64>,
    pub constants: BTreeMap<String, f64>,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
}

/// Collects outputs while an experiment runs.
pub struct ManifestBuilder {
    out_dir: PathBuf,
    start: Instant,
    manifest: ExperimentManifest,
}

impl ManifestBuilder {
    pub fn new(command: &str, config: &Config, out_dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(out_dir)?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            start: Instant::now(),
            manifest: ExperimentManifest {
                command: command.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                config: config.sections().clone(),
                ..Default::default()
            },
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    pub fn seed(&mut self, name: &str, seed: u64) {
        self.manifest.seeds.insert(name.to_string(), seed);
    }

    pub fn constant(&mut self, name: &str, value: f64) {
        self.manifest.constants.insert(name.to_string(), value);
    }

    /// Creates `relative` inside the output directory and records it.
    pub fn create(&mut self, relative: &str) -> Result<std::io::BufWriter<std::fs::File>> {
        let path = self.out_dir.join(relative);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        self.manifest.outputs.push(relative.to_string());
        Ok(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn finish(mut self) -> Result<ExperimentManifest> {
        self.manifest.wall_clock_seconds = self.start.elapsed().as_secs_f64();
        let file = std::fs::File::create(self.out_dir.join("manifest.json"))?;
        serde_json::to_writer_pretty(file, &self.manifest)?;
        Ok(self.manifest)
    }
}

pub fn read_manifest(path: &Path) -> Result<ExperimentManifest> {
    let file = std::fs::File::open(path)?;
    Ok(serde_json::from_reader(file)?)
}
