//! Agent checkpoints: one JSON file holding the configuration, all six
//! networks, the three optimizer states and the update counter. Parameter
//! and moment arrays use the base64 `f32` encoding from
//! [`crate::nn::checkpoint`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::Td3Config;
use super::networks::{ActorNetwork, CriticNetwork};
use super::td3::Td3Bundle;
use crate::encoder::EncoderConfig;
use crate::envs::{ActionBounds, EnvSpec};
use crate::nn::checkpoint::{read_json, write_json, AdamRecord, F32Array};
use crate::{Error, Result};

pub const AGENT_FORMAT: &str = "histenc-agent/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentCheckpoint {
    pub format: String,
    /// Environment the agent was trained on, if known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub env: Option<EnvSpec>,
    pub obs_width: usize,
    pub encoder: EncoderConfig,
    pub td3: Td3Config,
    pub action_bounds: ActionBounds,
    pub update_count: u64,
    pub actor: F32Array,
    pub critic1: F32Array,
    pub critic2: F32Array,
    pub actor_target: F32Array,
    pub critic1_target: F32Array,
    pub critic2_target: F32Array,
    pub actor_adam: AdamRecord,
    pub critic1_adam: AdamRecord,
    pub critic2_adam: AdamRecord,
}

impl AgentCheckpoint {
    pub fn new(bundle: &Td3Bundle<f32>, env: Option<EnvSpec>) -> Self {
        let array = |v: &Vec<f32>| F32Array(v.clone());
        Self {
            format: AGENT_FORMAT.to_string(),
            env,
            obs_width: bundle.obs_width(),
            encoder: bundle.actor_network().encoder().config().clone(),
            td3: bundle.config().clone(),
            action_bounds: bundle.action_bounds().clone(),
            update_count: bundle.update_count,
            actor: array(&bundle.actor),
            critic1: array(&bundle.critic1),
            critic2: array(&bundle.critic2),
            actor_target: array(&bundle.actor_target),
            critic1_target: array(&bundle.critic1_target),
            critic2_target: array(&bundle.critic2_target),
            actor_adam: AdamRecord::from(&bundle.actor_adam),
            critic1_adam: AdamRecord::from(&bundle.critic1_adam),
            critic2_adam: AdamRecord::from(&bundle.critic2_adam),
        }
    }

    pub fn restore(self) -> Result<Td3Bundle<f32>> {
        if self.format != AGENT_FORMAT {
            return Err(Error::contract(format!("unsupported checkpoint format {:?}", self.format)));
        }
        self.td3.validate()?;
        let actor_net = ActorNetwork::new(
            self.encoder.clone(),
            self.obs_width,
            &self.td3.actor_hidden,
            self.action_bounds.clone(),
        )?;
        let critic_net = CriticNetwork::new(
            self.encoder,
            self.obs_width,
            &self.td3.critic_hidden,
            self.action_bounds.width(),
        )?;
        let actor_count = actor_net.param_count();
        let critic_count = critic_net.param_count();
        Td3Bundle::from_parts(
            self.td3,
            actor_net,
            critic_net,
            [
                self.actor.0,
                self.critic1.0,
                self.critic2.0,
                self.actor_target.0,
                self.critic1_target.0,
                self.critic2_target.0,
            ],
            [
                self.actor_adam.into_state(actor_count)?,
                self.critic1_adam.into_state(critic_count)?,
                self.critic2_adam.into_state(critic_count)?,
            ],
            self.update_count,
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }
}
