//! Run manifests: enough provenance (argv, seed, input digests) to rerun a
//! command and reproduce its outputs byte-for-byte.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Process arguments after the binary name; rerunning with exactly these
    /// reproduces the outputs.
    pub argv: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<String>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes =
        fs::read(path).with_context(|| format!("cannot digest {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Default manifest location for an output file.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".into());
    name.push_str(".manifest.json");
    output.with_file_name(name)
}

pub fn write_manifest(
    command: &str,
    seed: Option<u64>,
    inputs: &[&Path],
    outputs: &[&Path],
) -> Result<()> {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let inputs = inputs
        .iter()
        .map(|p| {
            Ok(FileDigest {
                path: p.display().to_string(),
                sha256: sha256_file(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = RunManifest {
        command: command.to_string(),
        argv,
        seed,
        inputs,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let primary = outputs.first().context("manifest needs at least one output")?;
    let path = manifest_path(primary);
    let mut body = serde_json::to_string_pretty(&manifest)?;
    body.push('\n');
    fs::write(&path, body).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
