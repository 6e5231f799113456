//! Run manifests: the resolved configuration, seed, and content hashes of
//! every artifact a run wrote. Identical manifests imply bit-identical
//! data files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub artifacts: Vec<ArtifactRecord>,
    /// Linear intensity scales of emitted PGM heatmaps (min, max).
    pub pgm_scales: BTreeMap<String, (f64, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub name: String,
    pub sha256: String,
}

/// Collects artifacts written into one run directory.
pub struct RunDir {
    dir: PathBuf,
    records: Vec<ArtifactRecord>,
    pgm_scales: BTreeMap<String, (f64, f64)>,
}

impl RunDir {
    pub fn create(dir: &Path) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), records: Vec::new(), pgm_scales: BTreeMap::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Register an already-written file: hashed into the manifest.
    pub fn register(&mut self, name: &str) -> anyhow::Result<()> {
        let bytes = std::fs::read(self.path(name))
            .with_context(|| format!("hashing artifact {name}"))?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for b in digest.iter() {
            use std::fmt::Write;
            write!(hex, "{b:02x}").expect("writing to a string");
        }
        self.records.push(ArtifactRecord { name: name.to_string(), sha256: hex });
        Ok(())
    }

    pub fn register_pgm_scale(&mut self, name: &str, min: f64, max: f64) {
        self.pgm_scales.insert(name.to_string(), (min, max));
    }

    /// Write a JSON artifact and register it.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let text = serde_json::to_string_pretty(value)?;
        std::fs::write(self.path(name), text)?;
        self.register(name)
    }

    pub fn finalize(
        self,
        command: &str,
        seed: u64,
        config: &ExperimentConfig,
    ) -> anyhow::Result<()> {
        let manifest = RunManifest {
            command: command.to_string(),
            seed,
            config: config.clone(),
            artifacts: self.records,
            pgm_scales: self.pgm_scales,
        };
        let text = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(self.dir.join("manifest.json"), text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_hashes_artifacts() {
        let dir = std::env::temp_dir().join(format!("vibronic-manifest-{}", std::process::id()));
        let mut run = RunDir::create(&dir).unwrap();
        std::fs::write(run.path("data.csv"), "x,y\n1,2\n").unwrap();
        run.register("data.csv").unwrap();
        run.finalize("test", 7, &ExperimentConfig::default()).unwrap();
        let manifest: RunManifest =
            serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap())
                .unwrap();
        assert_eq!(manifest.artifacts.len(), 1);
        assert_eq!(manifest.artifacts[0].name, "data.csv");
        assert_eq!(manifest.artifacts[0].sha256.len(), 64);
        assert_eq!(manifest.seed, 7);
        std::fs::remove_dir_all(&dir).ok();
    }
}
