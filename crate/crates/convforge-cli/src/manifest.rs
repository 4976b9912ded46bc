//! Run manifests: every file-producing run writes a sibling
//! `<out>.manifest.json` naming the command, its arguments, the seed if any,
//! and SHA-256 digests of all input and output files. Manifests carry wall
//! time, so they are the one file excluded from byte-identity guarantees.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use convforge::io::{write_json, SCHEMA};
use convforge::{Error, Result};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub schema: String,
    pub kind: String,
    pub command: String,
    pub arguments: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tool_version: String,
    pub wall_time_ms: u64,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

/// SHA-256 of a file's bytes, hex encoded.
pub fn digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// `net.json` maps to `net.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

/// Writes the manifest next to the first output file.
pub fn write(
    command: &str,
    seed: Option<u64>,
    started: Instant,
    inputs: &[&Path],
    outputs: &[&Path],
) -> Result<()> {
    let main_out = outputs.first().expect("at least one output file");
    let mut input_map = BTreeMap::new();
    for path in inputs {
        input_map.insert(path.display().to_string(), digest(path)?);
    }
    let mut output_map = BTreeMap::new();
    for path in outputs {
        output_map.insert(path.display().to_string(), digest(path)?);
    }
    let manifest = RunManifest {
        schema: SCHEMA.into(),
        kind: "manifest".into(),
        command: command.into(),
        arguments: std::env::args().skip(1).collect(),
        seed,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        wall_time_ms: started.elapsed().as_millis() as u64,
        inputs: input_map,
        outputs: output_map,
    };
    write_json(&manifest_path(main_out), &manifest)
}
