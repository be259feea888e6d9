//! Optional `paircheck.toml`: flat keys, every one optional. Values given on
//! the command line win over the file, and the file wins over built-in
//! defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::CliError;

pub const DEFAULT_CONFIG: &str = "paircheck.toml";

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub out_dir: Option<PathBuf>,
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_step: Option<f64>,
    pub overflow_cap: Option<f64>,
    /// Output sample spacing for trajectories.
    pub resolution: Option<f64>,
    /// Half-width of the parity window.
    pub window: Option<f64>,
    pub grid_step: Option<f64>,
    pub renorm_threshold: Option<f64>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("bad config file: {e}")))
    }

    /// An explicit path must exist; otherwise `./paircheck.toml` is used if
    /// present.
    pub fn load(explicit: Option<&Path>) -> Result<Config, CliError> {
        let path = match explicit {
            Some(p) => p.to_path_buf(),
            None => {
                let p = PathBuf::from(DEFAULT_CONFIG);
                if !p.is_file() {
                    return Ok(Config::default());
                }
                p
            }
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}
