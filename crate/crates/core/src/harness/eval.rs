use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::Td3Bundle;
use crate::encoder::HistoryWindow;
use crate::envs::Environment;
use crate::nn::derive_seed;
use crate::{Error, Result};

/// Result of one evaluation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub global_step: u64,
    pub mean_return: f64,
    pub episode_returns: Vec<f64>,
}

impl EvalRecord {
    pub fn new(global_step: u64, episode_returns: Vec<f64>) -> Result<Self> {
        if episode_returns.is_empty() {
            return Err(Error::contract("an evaluation record needs at least one episode"));
        }
        let mean_return = episode_returns.iter().sum::<f64>() / episode_returns.len() as f64;
        Ok(Self {
            global_step,
            mean_return,
            episode_returns,
        })
    }
}

/// Return of one deterministic episode, starting from `env.reset(seed)`.
pub fn run_episode(env: &mut dyn Environment, bundle: &Td3Bundle<f32>, seed: u64) -> Result<f64> {
    // Deterministic actions draw nothing from this generator.
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let first = env.reset(seed)?;
    let mut window = HistoryWindow::start(&first, bundle.window_length())?;
    let mut total = 0.0;
    loop {
        let action = bundle.select_action(&window, false, &mut rng)?;
        let step = env.step(&action)?;
        total += step.reward;
        if step.done() {
            return Ok(total);
        }
        window = window.shifted(&step.observation)?;
    }
}

/// Runs `episodes` noise-free episodes. Episode `k` resets with
/// `derive_seed(seed, k)`, so repeated calls see the same initial states.
pub fn evaluate_policy(
    env: &mut dyn Environment,
    bundle: &Td3Bundle<f32>,
    episodes: usize,
    seed: u64,
    global_step: u64,
) -> Result<EvalRecord> {
    let returns = (0..episodes as u64)
        .map(|k| run_episode(env, bundle, derive_seed(seed, k)))
        .collect::<Result<Vec<_>>>()?;
    EvalRecord::new(global_step, returns)
}
