use crate::ServiceError;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const CONFIG_ENV: &str = "PSYSCALE_CONFIG";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default = "default_listen")]
    pub listen: String,
    /// Sequence directory produced by `stimgen`.
    pub stimuli_dir: PathBuf,
    /// Per-session response files are written here.
    pub output_dir: PathBuf,
    #[serde(default = "default_max_trials")]
    pub max_trials_per_session: usize,
    #[serde(default)]
    pub rng_seed: u64,
}

fn default_listen() -> String {
    "127.0.0.1:8080".to_string()
}

fn default_max_trials() -> usize {
    200
}

impl ServiceConfig {
    pub fn new(stimuli_dir: PathBuf, output_dir: PathBuf) -> Self {
        Self {
            listen: default_listen(),
            stimuli_dir,
            output_dir,
            max_trials_per_session: default_max_trials(),
            rng_seed: 0,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ServiceError> {
        toml::from_str(text).map_err(|e| ServiceError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Reads the file named by `PSYSCALE_CONFIG`, if set.
    pub fn from_env() -> Result<Option<Self>, ServiceError> {
        match std::env::var_os(CONFIG_ENV) {
            Some(path) => Self::load(Path::new(&path)).map(Some),
            None => Ok(None),
        }
    }

    /// Checks the directories and creates the output directory if needed.
    pub fn validate(&self) -> Result<(), ServiceError> {
        if self.max_trials_per_session == 0 {
            return Err(ServiceError::Config("max_trials_per_session must be at least 1".into()));
        }
        if !self.stimuli_dir.is_dir() {
            return Err(ServiceError::Config(format!(
                "stimuli_dir {} is not a directory",
                self.stimuli_dir.display()
            )));
        }
        std::fs::create_dir_all(&self.output_dir).map_err(|e| {
            ServiceError::Config(format!("output_dir {}: {e}", self.output_dir.display()))
        })?;
        let probe = self.output_dir.join(".write-probe");
        std::fs::write(&probe, b"").map_err(|e| {
            ServiceError::Config(format!("output_dir {} is not writable: {e}", self.output_dir.display()))
        })?;
        let _ = std::fs::remove_file(probe);
        Ok(())
    }
}
