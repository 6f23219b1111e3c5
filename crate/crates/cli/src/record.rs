use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::commands::Outcome;

pub const LOG_FILE: &str = "runs.jsonl";

/// One line of the run log: enough to replay a command and check that its
/// output bytes are unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: String,
    pub command: String,
    /// Arguments after the program name, verbatim.
    pub args: Vec<String>,
    /// Fully resolved configuration, defaults included.
    pub config: serde_json::Value,
    pub map_hash: Option<String>,
    pub rng_seed: Option<u64>,
    pub version: String,
    pub output_sha256: String,
    pub output_path: Option<String>,
    pub exit_code: u8,
    pub duration_ms: u64,
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl RunRecord {
    pub fn new(
        outcome: &Outcome,
        args: Vec<String>,
        output: &str,
        output_path: Option<&Path>,
        exit_code: u8,
        elapsed: Duration,
    ) -> Self {
        RunRecord {
            schema: "orbitlab/run_record/v1".into(),
            command: outcome.command.clone(),
            args,
            config: outcome.config.clone(),
            map_hash: outcome.map_hash.clone(),
            rng_seed: outcome.rng_seed,
            version: env!("CARGO_PKG_VERSION").into(),
            output_sha256: sha256_hex(output),
            output_path: output_path.map(|p| p.display().to_string()),
            exit_code,
            duration_ms: elapsed.as_millis() as u64,
        }
    }

    pub fn append(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(LOG_FILE);
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .with_context(|| format!("opening {}", path.display()))?;
        writeln!(f, "{}", serde_json::to_string(self)?)?;
        Ok(())
    }

    /// Record `index` (default: last) of a JSON-lines log.
    pub fn load(path: &Path, index: Option<usize>) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        let line = match index {
            Some(i) => lines.get(i).copied(),
            None => lines.last().copied(),
        }
        .ok_or_else(|| orbitlab_core::Error::InvalidConfig("no such run record".into()))?;
        Ok(serde_json::from_str(line).map_err(orbitlab_core::Error::from)?)
    }
}
