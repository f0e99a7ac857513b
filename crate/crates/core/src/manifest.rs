//! Run manifests: which config, seed and inputs produced a stage's outputs.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Hash of the canonical config. The output directory is left out so the
/// same experiment written to two places carries the same hash.
pub fn config_hash(cfg: &PipelineConfig) -> String {
    let mut c = cfg.clone();
    c.output_dir = PathBuf::new();
    sha256_hex(c.to_toml().as_bytes())
}

/// First line of every CSV output.
pub fn csv_preamble(config_hash: &str, seed: u64) -> String {
    format!("# config_hash={config_hash} seed={seed}\n")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    /// Input path -> sha256. Inputs inside the output directory are keyed
    /// relative to it, prefixed with `$OUT/`.
    pub inputs: BTreeMap<String, String>,
    /// Output path relative to the output directory -> sha256.
    pub outputs: BTreeMap<String, String>,
    /// Seconds since the Unix epoch.
    pub created_unix: u64,
}

impl RunManifest {
    pub fn new(command: &str, cfg: &PipelineConfig) -> Self {
        RunManifest {
            command: command.to_string(),
            config_hash: config_hash(cfg),
            seed: cfg.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn add_input(&mut self, output_dir: &Path, path: &Path) -> Result<()> {
        let digest = if path.is_dir() {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(path)
                .map_err(|e| Error::io(path, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            entries.sort();
            let mut joined = String::new();
            for p in entries {
                joined.push_str(&format!("{} {}\n", sha256_file(&p)?, p.file_name().unwrap_or_default().to_string_lossy()));
            }
            sha256_hex(joined.as_bytes())
        } else {
            sha256_file(path)?
        };
        let key = match path.strip_prefix(output_dir) {
            Ok(rel) => format!("$OUT/{}", rel.display()),
            Err(_) => path.display().to_string(),
        };
        self.inputs.insert(key, digest);
        Ok(())
    }

    pub fn add_output(&mut self, output_dir: &Path, path: &Path) -> Result<()> {
        let rel = path.strip_prefix(output_dir).unwrap_or(path);
        self.outputs.insert(rel.display().to_string(), sha256_file(path)?);
        Ok(())
    }

    /// Writes `manifests/<command>.json` under the output directory.
    pub fn write(&self, output_dir: &Path) -> Result<PathBuf> {
        let dir = output_dir.join("manifests");
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let path = dir.join(format!("{}.json", self.command));
        std::fs::write(&path, serde_json::to_string_pretty(self)? + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn hash_ignores_output_dir() {
        let a = PipelineConfig::default();
        let mut b = a.clone();
        b.output_dir = PathBuf::from("/elsewhere");
        assert_eq!(config_hash(&a), config_hash(&b));
        b.seed = 7;
        assert_ne!(config_hash(&a), config_hash(&b));
    }
}
