//! Window oracle: expected rows rebuilt from the full push log.

use histenc_td3::agent::{ReplayBuffer, Transition};
use proptest::prelude::*;

pub fn obs(episode: u64, step: u64) -> Vec<f32> {
    vec![episode as f32, step as f32]
}

/// Pushes episodes of the given lengths and returns the push log.
pub fn fill(buffer: &mut ReplayBuffer<f32>, lengths: &[u64]) -> Vec<Transition<f32>> {
    let mut log = Vec::new();
    for (episode, &len) in lengths.iter().enumerate() {
        let episode = episode as u64;
        for step in 0..len {
            let last = step + 1 == len;
            let t = Transition {
                observation: obs(episode, step),
                action: vec![step as f32 * 0.5],
                reward: (episode * 100 + step) as f32,
                next_observation: obs(episode, step + 1),
                terminated: last && episode % 2 == 0,
                truncated: last && episode % 2 == 1,
                episode_id: episode,
                step_index: step,
            };
            buffer.push(t.clone()).unwrap();
            log.push(t);
        }
    }
    log
}

/// Expected (window, next_window) rows for the surviving transition at
/// (episode, step), from the log alone.
pub fn expected(log: &[Transition<f32>], capacity: usize, episode: u64, step: u64, h: usize) -> (Vec<f32>, Vec<f32>) {
    let surviving = &log[log.len().saturating_sub(capacity)..];
    let earliest = surviving
        .iter()
        .filter(|t| t.episode_id == episode)
        .map(|t| t.step_index)
        .min()
        .unwrap();
    let first = step.saturating_sub(h as u64 - 1).max(earliest);
    let mut rows: Vec<Vec<f32>> = (first..=step).map(|s| obs(episode, s)).collect();
    while rows.len() < h {
        rows.insert(0, rows[0].clone());
    }
    let mut next = rows[1..].to_vec();
    next.push(obs(episode, step + 1));
    (rows.concat(), next.concat())
}

pub fn check_all_indices(lengths: &[u64], capacity: usize, h: usize) -> Result<(), TestCaseError> {
    let mut buffer = ReplayBuffer::new(capacity, 2, 1).unwrap();
    let log = fill(&mut buffer, lengths);
    prop_assert_eq!(buffer.len(), log.len().min(capacity));
    for index in 0..buffer.len() {
        let t = buffer.get(index).unwrap();
        let (window, next) = buffer.assemble_window(index, h).unwrap();
        for row in window.rows().chain(next.rows()) {
            prop_assert_eq!(row[0], t.episode_id as f32, "window mixes episodes");
        }
        let (rows, next_rows) = expected(&log, capacity, t.episode_id, t.step_index, h);
        prop_assert_eq!(window.as_flat(), rows.as_slice());
        prop_assert_eq!(next.as_flat(), next_rows.as_slice());
        prop_assert_eq!(window.current(), t.observation.as_slice());
    }
    Ok(())
}

