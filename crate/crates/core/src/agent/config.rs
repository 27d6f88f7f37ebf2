use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// TD3 hyperparameters. Defaults follow the original TD3 setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Td3Config {
    pub discount: f64,
    pub tau: f64,
    /// Std of the target-policy smoothing noise, in action units.
    pub policy_noise: f64,
    /// Smoothing noise is clipped to `±noise_clip`, in action units.
    pub noise_clip: f64,
    pub policy_delay: u64,
    /// Exploration noise std as a fraction of each action's half range.
    pub exploration_noise: f64,
    pub batch_size: usize,
    /// Uniform-random actions for this many environment steps before learning.
    pub warmup_steps: u64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    pub buffer_capacity: usize,
}

impl Default for Td3Config {
    fn default() -> Self {
        Self {
            discount: 0.99,
            tau: 0.005,
            policy_noise: 0.2,
            noise_clip: 0.5,
            policy_delay: 2,
            exploration_noise: 0.1,
            batch_size: 256,
            warmup_steps: 10_000,
            actor_lr: 3e-4,
            critic_lr: 3e-4,
            actor_hidden: vec![256, 256],
            critic_hidden: vec![256, 256],
            buffer_capacity: 1_000_000,
        }
    }
}

impl Td3Config {
    /// Defaults scaled for the built-in desk-scale environments.
    pub fn builtin() -> Self {
        Self {
            warmup_steps: 1_000,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::config(msg.to_string()));
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return fail("discount must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return fail("tau must lie in [0, 1]");
        }
        if self.policy_noise < 0.0 || self.noise_clip < 0.0 || self.exploration_noise < 0.0 {
            return fail("noise scales must be non-negative");
        }
        if self.policy_delay == 0 || self.batch_size == 0 || self.warmup_steps == 0 {
            return fail("policy_delay, batch_size and warmup_steps must be positive");
        }
        if self.buffer_capacity == 0 {
            return fail("buffer_capacity must be positive");
        }
        if self.actor_hidden.contains(&0) || self.critic_hidden.contains(&0) {
            return fail("hidden widths must be positive");
        }
        Ok(())
    }
}
