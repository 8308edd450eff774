//! Resumable GA state on disk.

use std::path::Path;

use serde::{Deserialize, Serialize};
use superarray_core::ga::{GaRunState, GenerationStats};

use crate::error::{CliError, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema_version: u32,
    pub fingerprint: String,
    #[serde(flatten)]
    pub state: GaRunState,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        crate::output::write_json(path, self)
    }

    /// Loads a checkpoint written for the run identified by `fingerprint`.
    pub fn load(path: &Path, fingerprint: &str) -> Result<GaRunState> {
        let fail = |reason: String| CliError::Checkpoint {
            path: path.to_path_buf(),
            reason,
        };
        let text = std::fs::read_to_string(path).map_err(|e| fail(e.to_string()))?;
        let raw: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| fail(e.to_string()))?;
        let version = raw.get("schema_version").and_then(|v| v.as_u64());
        if version != Some(CHECKPOINT_VERSION as u64) {
            return Err(fail(format!(
                "schema_version {version:?} is not supported (expected {CHECKPOINT_VERSION})"
            )));
        }
        let ckpt: Checkpoint = serde_json::from_value(raw).map_err(|e| fail(e.to_string()))?;
        if ckpt.fingerprint != fingerprint {
            return Err(fail("written for a different configuration".into()));
        }
        Ok(ckpt.state)
    }
}

pub fn history_csv(fingerprint: &str, history: &[GenerationStats]) -> String {
    use crate::output::sig9;
    let mut out = format!("# fingerprint={fingerprint}\ngeneration,best,mean,median\n");
    for h in history {
        out.push_str(&format!(
            "{},{},{},{}\n",
            h.generation,
            sig9(h.best),
            sig9(h.mean),
            sig9(h.median)
        ));
    }
    out
}
