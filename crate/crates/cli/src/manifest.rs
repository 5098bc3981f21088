//! Run manifests written next to every CSV file.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub scenario_path: Option<String>,
    pub scenario_sha256: Option<String>,
    pub seed: Option<u64>,
    pub schema_version: u32,
    pub tool_version: String,
    pub timestamp: String,
    pub output_sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `run.csv` -> `run.csv.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub struct Input<'a> {
    pub path: &'a Path,
    pub bytes: &'a [u8],
}

/// Writes the CSV body and its manifest.
pub fn write_outputs(
    argv: &[String],
    input: Option<Input<'_>>,
    seed: Option<u64>,
    out: &Path,
    csv: &str,
) -> anyhow::Result<()> {
    std::fs::write(out, csv).with_context(|| format!("writing {}", out.display()))?;
    let manifest = RunManifest {
        command_line: argv.to_vec(),
        scenario_path: input.as_ref().map(|i| i.path.display().to_string()),
        scenario_sha256: input.as_ref().map(|i| sha256_hex(i.bytes)),
        seed,
        schema_version: zeno_steer::scenario::SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339(),
        output_sha256: sha256_hex(csv.as_bytes()),
    };
    let path = manifest_path(out);
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
