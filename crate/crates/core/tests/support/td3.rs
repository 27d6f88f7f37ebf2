//! Small TD3 fixtures shared by the invariant suites.

use histenc_td3::agent::{ReplayBuffer, Td3Bundle, Td3Config, Transition};
use histenc_td3::encoder::{EncoderConfig, EncoderVariant, HistoryWindow};
use histenc_td3::envs::ActionBounds;
use histenc_td3::nn::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn encoder() -> EncoderConfig {
    EncoderConfig {
        variant: EncoderVariant::Parallel,
        window_length: 3,
        embed_width: 4,
        combiner_hidden_widths: vec![6],
        context_width: 5,
    }
}

pub fn config() -> Td3Config {
    Td3Config {
        batch_size: 8,
        actor_hidden: vec![8, 8],
        critic_hidden: vec![8, 8],
        ..Td3Config::builtin()
    }
}

pub fn bounds() -> ActionBounds {
    ActionBounds::new(vec![-1.0, 0.0], vec![1.0, 3.0]).unwrap()
}

pub fn bundle<T: Scalar>(config: Td3Config, seed: u64) -> Td3Bundle<T> {
    Td3Bundle::new(2, encoder(), config, bounds(), seed).unwrap()
}

pub fn window<T: Scalar>(rng: &mut ChaCha8Rng) -> HistoryWindow<T> {
    let rows: Vec<T> = (0..6).map(|_| T::lit(rng.random_range(-1.0..1.0))).collect();
    HistoryWindow::full(rows, 2).unwrap()
}

pub fn buffer(seed: u64) -> ReplayBuffer<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buffer = ReplayBuffer::new(500, 2, 2).unwrap();
    for episode in 0..10u64 {
        let len = rng.random_range(5..30);
        for step in 0..len {
            let o: Vec<f32> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            buffer
                .push(Transition {
                    next_observation: o.iter().map(|v| v + 0.1).collect(),
                    observation: o,
                    action: vec![rng.random_range(-1.0..1.0), rng.random_range(0.0..3.0)],
                    reward: rng.random_range(-1.0..1.0),
                    terminated: step + 1 == len && episode % 3 == 0,
                    truncated: step + 1 == len && episode % 3 != 0,
                    episode_id: episode,
                    step_index: step,
                })
                .unwrap();
        }
    }
    buffer
}

/// Makes a critic output the constant `value`: zero last-layer weights and
/// the final bias set to `value`.
pub fn constant_critic(agent: &Td3Bundle<f64>, params: &mut [f64], value: f64) {
    let head = agent.critic_network().head().layer_widths().to_vec();
    let last_in = head[head.len() - 2];
    let n = params.len();
    params[n - 1 - last_in..n - 1].fill(0.0);
    params[n - 1] = value;
}

