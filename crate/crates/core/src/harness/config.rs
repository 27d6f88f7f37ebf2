use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::Td3Config;
use crate::encoder::EncoderConfig;
use crate::envs::{EnvSpec, RandomizationSchedule};
use crate::nn::checkpoint::read_json;
use crate::{Error, Result};

/// One experiment: an environment, an agent configuration and a protocol,
/// repeated over several seeds.
///
/// ```json
/// {
///   "env": {"id": "pendulum", "mask": ["velocity"]},
///   "encoder": {"variant": "parallel", "window_length": 5, "embed_width": 16,
///               "combiner_hidden_widths": [64], "context_width": 32},
///   "td3": {"batch_size": 128, "actor_hidden": [64, 64], "critic_hidden": [64, 64]},
///   "total_steps": 100000,
///   "seeds": [0, 1, 2, 3, 4],
///   "output_dir": "runs/pendulum-v-h5"
/// }
/// ```
///
/// Omitted fields take their defaults. When `td3` is omitted entirely, the
/// built-in environments get [`Td3Config::builtin`] and remote ones
/// [`Td3Config::default`]; a partial `td3` object fills its gaps from
/// [`Td3Config::default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub env: EnvSpec,
    #[serde(default)]
    pub encoder: EncoderConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub td3: Option<Td3Config>,
    pub total_steps: u64,
    #[serde(default = "default_eval_interval")]
    pub eval_interval: u64,
    #[serde(default = "default_eval_episodes")]
    pub eval_episodes: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub randomization: Option<RandomizationSchedule>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_eval_interval() -> u64 {
    5_000
}

fn default_eval_episodes() -> usize {
    10
}

fn default_seeds() -> Vec<u64> {
    (0..5).collect()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

impl RunConfig {
    /// A config with every protocol default for `env`.
    pub fn new(env: EnvSpec, total_steps: u64) -> Self {
        Self {
            env,
            encoder: EncoderConfig::default(),
            td3: None,
            total_steps,
            eval_interval: default_eval_interval(),
            eval_episodes: default_eval_episodes(),
            seeds: default_seeds(),
            randomization: None,
            output_dir: default_output_dir(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let config: Self = read_json(path)?;
        config.validate()?;
        Ok(config)
    }

    /// The TD3 settings actually used.
    pub fn resolved_td3(&self) -> Td3Config {
        match &self.td3 {
            Some(td3) => td3.clone(),
            None if self.env.is_builtin() => Td3Config::builtin(),
            None => Td3Config::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.encoder.validate()?;
        self.resolved_td3().validate()?;
        if self.eval_interval == 0 {
            return Err(Error::config("eval_interval must be positive"));
        }
        if self.eval_episodes == 0 {
            return Err(Error::config("eval_episodes must be positive"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("at least one seed is required"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return Err(Error::config("seeds must be distinct"));
        }
        if let Some(schedule) = &self.randomization {
            schedule.validate()?;
        }
        Ok(())
    }
}
