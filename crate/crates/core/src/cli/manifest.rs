use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::odecore::ToleranceSpec;
use crate::repro::{preset, FigureId};

use super::CliError;

/// Everything needed to re-run a command and get byte-identical outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub subcommand: String,
    /// Fully resolved parameters of the subcommand.
    pub parameters: serde_json::Value,
    pub tolerances: ToleranceSpec,
    /// Unix seconds.
    pub timestamp: u64,
    /// SHA-256 of the embedded figure presets.
    pub preset_hash: String,
}

impl RunManifest {
    /// Read a manifest file, or the `manifest` object embedded in a report.
    pub fn from_json(text: &str) -> Result<RunManifest, CliError> {
        let v: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| CliError::Usage(format!("manifest is not valid JSON: {e}")))?;
        let inner = match v.get("manifest") {
            Some(m) => m.clone(),
            None => v,
        };
        serde_json::from_value(inner).map_err(|e| CliError::Usage(format!("bad manifest: {e}")))
    }
}

pub fn tool_version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

pub fn preset_hash() -> String {
    let presets: Vec<_> = FigureId::ALL.iter().map(|&id| preset(id, false)).collect();
    let bytes = serde_json::to_vec(&presets).expect("presets serialize");
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// `--timestamp`, else `SOURCE_DATE_EPOCH`, else the clock.
pub fn resolve_timestamp(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(t) = flag {
        return Ok(t);
    }
    if let Ok(s) = std::env::var("SOURCE_DATE_EPOCH") {
        return s
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("SOURCE_DATE_EPOCH is not an integer: {s:?}")));
    }
    Ok(std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0))
}
