use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const VERSION: &str = match option_env!("RMTWIST_VERSION") {
    Some(v) => v,
    None => concat!("v", env!("CARGO_PKG_VERSION")),
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

impl OutputDigest {
    pub fn of(file: &str, content: &str) -> Self {
        Self { file: file.into(), sha256: sha256_hex(content.as_bytes()), bytes: content.len() }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Everything needed to rerun a command and check its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    /// Arguments after the program name, as given.
    pub command_line: Vec<String>,
    /// Contents of the `--config` file.
    pub config_snapshot: Option<String>,
    pub curve: Option<String>,
    pub engine: Option<String>,
    #[serde(rename = "T")]
    pub t: Option<u64>,
    pub seed: Option<u64>,
    pub threads: usize,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub outputs: Vec<OutputDigest>,
    pub notes: BTreeMap<String, String>,
}

pub fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}
