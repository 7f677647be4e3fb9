//! Effective settings: defaults, then a TOML file, then environment, then
//! command-line flags (applied by the caller).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{Pipeline, PipelineConfig, SynthOptions};
use crate::llm::{LiveTransport, LlmConfig, ReplayTransport, Transport};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub pipeline: PipelineConfig,
    pub llm: LlmConfig,
    /// Canned-response directory. When set, no request leaves the machine.
    pub replay: Option<PathBuf>,
    /// Worker threads; `None` means one per logical core.
    pub workers: Option<usize>,
    /// Any record-level failure makes the command exit 1.
    pub strict: bool,
    pub synth: SynthOptions,
    pub pattern_train_fraction: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            pipeline: PipelineConfig::default(),
            llm: LlmConfig::default(),
            replay: None,
            workers: None,
            strict: false,
            synth: SynthOptions::default(),
            pattern_train_fraction: 0.5,
        }
    }
}

impl Settings {
    /// Defaults overlaid with `file` (if any) and then the environment.
    pub fn load(file: Option<&Path>, env: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let Some(path) = file else {
            return Self::parse("", env);
        };
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, env).map_err(|e| match e {
            ConfigError::Parse { source, .. } => ConfigError::Parse {
                path: path.to_path_buf(),
                source,
            },
            other => other,
        })
    }

    /// Like [`Settings::load`] for TOML text already in memory.
    pub fn parse(text: &str, env: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let mut s: Settings = toml::from_str(text).map_err(|source| ConfigError::Parse {
            path: PathBuf::from("<inline>"),
            source,
        })?;
        s.llm.apply_env(env);
        Ok(s)
    }

    pub fn workers(&self) -> usize {
        self.workers
            .filter(|&n| n > 0)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    /// Pipeline with a transport attached only when the mode calls the LLM.
    pub fn build_pipeline(&self) -> Result<Pipeline, ConfigError> {
        let transport = if self.pipeline.mode.uses_llm() {
            self.transport()?
        } else {
            None
        };
        Pipeline::new(self.pipeline.clone(), transport).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Replay store if configured, else the live endpoint if one is set.
    pub fn transport(&self) -> Result<Option<Box<dyn Transport>>, ConfigError> {
        if let Some(dir) = &self.replay {
            if !dir.is_dir() {
                return Err(ConfigError::Invalid(format!(
                    "replay directory {} not found",
                    dir.display()
                )));
            }
            return Ok(Some(Box::new(ReplayTransport::new(dir.clone()))));
        }
        if self.llm.base_url.is_some() {
            let live = LiveTransport::new(&self.llm).map_err(|e| ConfigError::Invalid(e.to_string()))?;
            return Ok(Some(Box::new(live)));
        }
        Ok(None)
    }
}
