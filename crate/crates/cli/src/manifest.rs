//! `manifest.json`: config snapshot, stage completion and content hashes.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vistheme_core::util::write_json_atomic;

use crate::config::Config;

pub const MANIFEST_VERSION: u32 = 1;

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let mut file = std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex(&hasher.finalize()))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub complete: bool,
    pub params: serde_json::Value,
    /// Logical input name → sha256.
    pub inputs: BTreeMap<String, String>,
    /// Path relative to the run directory → sha256.
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub run_id: String,
    pub seed: u64,
    pub config: Config,
    pub stages: BTreeMap<String, StageRecord>,
}

impl Manifest {
    pub fn load_or_new(path: &Path, run_id: &str, config: &Config) -> anyhow::Result<Self> {
        let mut m = if path.exists() {
            let m: Manifest = serde_json::from_slice(&std::fs::read(path)?)
                .with_context(|| format!("corrupt manifest {}", path.display()))?;
            m
        } else {
            Manifest {
                version: MANIFEST_VERSION,
                run_id: run_id.to_string(),
                seed: config.seed,
                config: config.clone(),
                stages: BTreeMap::new(),
            }
        };
        m.seed = config.seed;
        m.config = config.clone();
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        write_json_atomic(path, self)?;
        Ok(())
    }

    pub fn is_complete(&self, stage: &str) -> bool {
        self.stages.get(stage).is_some_and(|s| s.complete)
    }

    /// True when `stage` completed with the same inputs and params and its
    /// outputs are still on disk unchanged.
    pub fn up_to_date(
        &self,
        root: &Path,
        stage: &str,
        inputs: &BTreeMap<String, String>,
        params: &serde_json::Value,
    ) -> bool {
        let Some(rec) = self.stages.get(stage) else { return false };
        rec.complete
            && &rec.inputs == inputs
            && &rec.params == params
            && rec.outputs.iter().all(|(rel, h)| sha256_file(&root.join(rel)).is_ok_and(|x| &x == h))
    }

    pub fn record(
        &mut self,
        root: &Path,
        stage: &str,
        inputs: BTreeMap<String, String>,
        params: serde_json::Value,
        outputs: &[PathBuf],
    ) -> anyhow::Result<()> {
        let mut hashed = BTreeMap::new();
        for p in outputs {
            let rel = p.strip_prefix(root).unwrap_or(p);
            hashed.insert(rel.to_string_lossy().replace('\\', "/"), sha256_file(p)?);
        }
        self.stages.insert(stage.to_string(), StageRecord { complete: true, params, inputs, outputs: hashed });
        Ok(())
    }

    pub fn mark_incomplete(&mut self, stage: &str) {
        if let Some(s) = self.stages.get_mut(stage) {
            s.complete = false;
        }
    }
}

/// Input hashes for a stage: `(name, path)` pairs.
pub fn hash_inputs(inputs: &[(&str, &Path)]) -> anyhow::Result<BTreeMap<String, String>> {
    inputs.iter().map(|(name, p)| Ok((name.to_string(), sha256_file(p)?))).collect()
}
