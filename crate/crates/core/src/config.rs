//! Service configuration: a TOML file, then `PRIVCHECK_*` environment
//! overrides on top.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

use crate::graph::parse_stranger_pool;
use crate::session::ServiceOptions;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config file {path}: {message}")]
    Syntax { path: PathBuf, message: String },
    #[error("invalid value for {key}: {value:?}")]
    Env { key: String, value: String },
    #[error("stranger pool {path}: {message}")]
    StrangerPool { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub listen: SocketAddr,
    pub session_ttl_secs: u64,
    pub max_sessions: usize,
    pub stranger_pool_path: Option<PathBuf>,
    /// Directory with the browser UI's static assets.
    pub static_dir: Option<PathBuf>,
    pub journal_path: Option<PathBuf>,
    /// Directory that `snapshot_path` in create-session requests may read from.
    pub snapshot_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            session_ttl_secs: 30 * 60,
            max_sessions: 1024,
            stranger_pool_path: None,
            static_dir: None,
            journal_path: None,
            snapshot_dir: None,
        }
    }
}

impl Config {
    /// Reads `path` (if any) and applies overrides from the process environment.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut config = match path {
            Some(path) => Self::from_file(path)?,
            None => Self::default(),
        };
        config.apply_env(std::env::vars())?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| ConfigError::Syntax {
            path: path.to_owned(),
            message: e.to_string(),
        })
    }

    pub fn apply_env<I>(&mut self, vars: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        for (key, value) in vars {
            let Some(name) = key.strip_prefix("PRIVCHECK_") else {
                continue;
            };
            let bad = || ConfigError::Env {
                key: key.clone(),
                value: value.clone(),
            };
            match name {
                "LISTEN" => self.listen = value.parse().map_err(|_| bad())?,
                "SESSION_TTL_SECS" => self.session_ttl_secs = value.parse().map_err(|_| bad())?,
                "MAX_SESSIONS" => self.max_sessions = value.parse().map_err(|_| bad())?,
                "STRANGER_POOL_PATH" => self.stranger_pool_path = non_empty(&value),
                "STATIC_DIR" => self.static_dir = non_empty(&value),
                "JOURNAL_PATH" => self.journal_path = non_empty(&value),
                "SNAPSHOT_DIR" => self.snapshot_dir = non_empty(&value),
                _ => log::warn!("ignoring unknown setting {key}"),
            }
        }
        Ok(())
    }

    pub fn service_options(&self) -> Result<ServiceOptions, ConfigError> {
        let mut opts = ServiceOptions {
            session_ttl: Duration::from_secs(self.session_ttl_secs),
            max_sessions: self.max_sessions,
            journal_path: self.journal_path.clone(),
            ..ServiceOptions::default()
        };
        if let Some(path) = &self.stranger_pool_path {
            let bytes = std::fs::read(path).map_err(|source| ConfigError::Io {
                path: path.clone(),
                source,
            })?;
            let pool = parse_stranger_pool(&bytes).map_err(|e| ConfigError::StrangerPool {
                path: path.clone(),
                message: e.to_string(),
            })?;
            opts.stranger_pool = pool.into();
        }
        Ok(opts)
    }
}

fn non_empty(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}
