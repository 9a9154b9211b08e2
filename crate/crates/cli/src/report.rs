use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    /// Effective configuration after defaults and instance values.
    pub parameters: BTreeMap<String, Value>,
    /// Arguments that reproduce this run.
    pub rerun: Vec<String>,
    pub timings: Timings,
    pub result: BTreeMap<String, Value>,
    /// File name to SHA-256 of its bytes.
    pub outputs: BTreeMap<String, String>,
    pub exit_status: i32,
}

#[derive(Debug, Default, Serialize)]
pub struct Timings {
    pub t_prep: f64,
    pub t_path: Option<f64>,
    pub t_solve: Option<f64>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects output files under one directory together with their digests.
pub struct OutDir {
    dir: PathBuf,
    pub written: BTreeMap<String, String>,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(OutDir {
            dir: dir.to_path_buf(),
            written: BTreeMap::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.written.insert(name.to_string(), sha256_hex(bytes));
        Ok(path)
    }

    pub fn finish(&mut self, mut report: RunReport) -> Result<()> {
        report.outputs = self.written.clone();
        let text = serde_json::to_string_pretty(&report)? + "\n";
        let path = self.dir.join("report.json");
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}
