//! JSON report envelope and config hashing.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::AppError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// First 16 hex digits of SHA-256 over the config's canonical JSON.
pub fn config_hash<C: Serialize>(config: &C) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    let digest = Sha256::digest(&bytes);
    hex::encode(&digest[..8])
}

#[derive(Debug, Serialize)]
pub struct Envelope<'a, C: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config_hash: String,
    pub config: &'a C,
    pub results: &'a [R],
}

impl<'a, C: Serialize, R: Serialize> Envelope<'a, C, R> {
    pub fn new(command: &'a str, config: &'a C, results: &'a [R]) -> Self {
        Self {
            tool: "oulab",
            version: VERSION,
            command,
            config_hash: config_hash(config),
            config,
            results,
        }
    }

    pub fn to_json(&self) -> Result<Vec<u8>, AppError> {
        let mut v = serde_json::to_vec_pretty(self).map_err(|e| AppError::Input(e.to_string()))?;
        v.push(b'\n');
        Ok(v)
    }
}
