//! Sweep configuration files.
//!
//! Configs are TOML documents deserialized into [`SweepConfig`]; unknown keys
//! are rejected. The config hash is the SHA-256 of the canonical JSON
//! rendering of the parsed config, so key order and formatting in the file do
//! not matter.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiment::SweepConfig;

/// Parses and validates a TOML config.
pub fn parse_config(text: &str) -> Result<SweepConfig> {
    let config: SweepConfig = toml::from_str(text).map_err(|e| {
        let field = offending_field(text, &e);
        Error::Config { field, message: e.message().to_string() }
    })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<SweepConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

// Best effort: a field named in the message, else the key on the line the
// error points at.
fn offending_field(text: &str, e: &toml::de::Error) -> String {
    let msg = e.message();
    if msg.starts_with("missing field") || msg.starts_with("unknown field") {
        if let Some(name) = msg.split('`').nth(1) {
            return name.to_string();
        }
    }
    if let Some(span) = e.span() {
        let line_start = text[..span.start.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
        let line = text[line_start..].lines().next().unwrap_or("");
        if let Some((key, _)) = line.split_once('=') {
            let key = key.trim();
            if !key.is_empty() {
                return key.to_string();
            }
        }
    }
    "config".to_string()
}

/// Canonical JSON: fields in declaration order, no whitespace.
pub fn canonical_json(config: &SweepConfig) -> String {
    serde_json::to_string(config).expect("config serializes")
}

/// Hex SHA-256 of [`canonical_json`].
pub fn config_hash(config: &SweepConfig) -> String {
    hex::encode(Sha256::digest(canonical_json(config).as_bytes()))
}
