use rand::Rng;

use crate::encoder::HistoryWindow;
use crate::error::check_width;
use crate::nn::Scalar;
use crate::{Error, Result};

/// One environment step as stored in the replay buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition<T> {
    pub observation: Vec<T>,
    pub action: Vec<T>,
    pub reward: T,
    pub next_observation: Vec<T>,
    pub terminated: bool,
    pub truncated: bool,
    pub episode_id: u64,
    pub step_index: u64,
}

/// Minibatch of windowed transitions.
#[derive(Debug, Clone)]
pub struct Batch<T> {
    pub windows: Vec<HistoryWindow<T>>,
    pub actions: Vec<Vec<T>>,
    pub rewards: Vec<T>,
    pub next_windows: Vec<HistoryWindow<T>>,
    pub terminated: Vec<bool>,
}

impl<T> Batch<T> {
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }
}

/// Ring buffer of flat transitions. History windows are assembled at sample
/// time by walking back through the same episode.
#[derive(Debug, Clone)]
pub struct ReplayBuffer<T> {
    capacity: usize,
    obs_width: usize,
    action_width: usize,
    slots: Vec<Transition<T>>,
    pushed: u64,
}

impl<T: Scalar> ReplayBuffer<T> {
    pub fn new(capacity: usize, obs_width: usize, action_width: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::config("replay capacity must be positive"));
        }
        Ok(Self {
            capacity,
            obs_width,
            action_width,
            slots: Vec::with_capacity(capacity.min(1 << 16)),
            pushed: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Stores `transition`, evicting the oldest one when full.
    pub fn push(&mut self, transition: Transition<T>) -> Result<()> {
        check_width("stored observation", self.obs_width, transition.observation.len())?;
        check_width("stored next observation", self.obs_width, transition.next_observation.len())?;
        check_width("stored action", self.action_width, transition.action.len())?;
        let slot = (self.pushed % self.capacity as u64) as usize;
        if slot == self.slots.len() {
            self.slots.push(transition);
        } else {
            self.slots[slot] = transition;
        }
        self.pushed += 1;
        Ok(())
    }

    /// The transition at storage slot `index`.
    pub fn get(&self, index: usize) -> Option<&Transition<T>> {
        self.slots.get(index)
    }

    /// Insertion sequence number of storage slot `index`.
    fn sequence_of(&self, index: usize) -> u64 {
        let cap = self.capacity as u64;
        let oldest = self.pushed - self.slots.len() as u64;
        oldest + (index as u64 + cap - oldest % cap) % cap
    }

    /// The storage slot holding the transition `back` steps before `index`
    /// within the same episode, if it is still stored.
    fn predecessor(&self, index: usize, back: u64) -> Option<usize> {
        let seq = self.sequence_of(index);
        let oldest = self.pushed - self.slots.len() as u64;
        if seq < oldest + back {
            return None;
        }
        let slot = ((seq - back) % self.capacity as u64) as usize;
        let current = &self.slots[index];
        let candidate = &self.slots[slot];
        (candidate.episode_id == current.episode_id && candidate.step_index + back == current.step_index)
            .then_some(slot)
    }

    /// The window of `window_length` observations ending at slot `index`, and
    /// the next window ending at that transition's next observation.
    ///
    /// Missing history (episode start, or predecessors already evicted) is
    /// padded by repeating the earliest available observation of the episode.
    pub fn assemble_window(&self, index: usize, window_length: usize) -> Result<(HistoryWindow<T>, HistoryWindow<T>)> {
        if index >= self.slots.len() {
            return Err(Error::contract(format!(
                "window index {index} outside buffer of length {}",
                self.slots.len()
            )));
        }
        if window_length == 0 {
            return Err(Error::contract("window length must be at least 1"));
        }
        let mut chain = vec![index];
        for back in 1..window_length as u64 {
            match self.predecessor(index, back) {
                Some(slot) => chain.push(slot),
                None => break,
            }
        }
        let rows: Vec<&[T]> = chain
            .iter()
            .rev()
            .map(|slot| self.slots[*slot].observation.as_slice())
            .collect();
        let window = HistoryWindow::from_valid(&rows, window_length)?;
        let next = window.shifted(&self.slots[index].next_observation)?;
        Ok((window, next))
    }

    pub fn sample<R: Rng + ?Sized>(&self, batch_size: usize, window_length: usize, rng: &mut R) -> Result<Batch<T>> {
        if self.slots.is_empty() {
            return Err(Error::contract("cannot sample from an empty replay buffer"));
        }
        let mut batch = Batch {
            windows: Vec::with_capacity(batch_size),
            actions: Vec::with_capacity(batch_size),
            rewards: Vec::with_capacity(batch_size),
            next_windows: Vec::with_capacity(batch_size),
            terminated: Vec::with_capacity(batch_size),
        };
        for _ in 0..batch_size {
            let index = rng.random_range(0..self.slots.len());
            let (window, next) = self.assemble_window(index, window_length)?;
            let t = &self.slots[index];
            batch.windows.push(window);
            batch.next_windows.push(next);
            batch.actions.push(t.action.clone());
            batch.rewards.push(t.reward);
            batch.terminated.push(t.terminated);
        }
        Ok(batch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn transition(obs: f32, episode: u64, step: u64) -> Transition<f32> {
        Transition {
            observation: vec![obs],
            action: vec![obs * 0.5],
            reward: -obs,
            next_observation: vec![obs + 1.0],
            terminated: false,
            truncated: false,
            episode_id: episode,
            step_index: step,
        }
    }

    #[test]
    fn single_element_sample_returns_it() {
        let mut buffer = ReplayBuffer::new(4, 1, 1).unwrap();
        buffer.push(transition(3.0, 0, 0)).unwrap();
        let batch = buffer.sample(1, 2, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(batch.windows[0].as_flat(), &[3.0, 3.0]);
        assert_eq!(batch.next_windows[0].as_flat(), &[3.0, 4.0]);
        assert_eq!(batch.actions[0], vec![1.5]);
        assert_eq!(batch.rewards[0], -3.0);
    }

    #[test]
    fn ring_evicts_oldest() {
        let mut buffer = ReplayBuffer::new(2, 1, 1).unwrap();
        for i in 0..3 {
            buffer.push(transition(i as f32, 0, i)).unwrap();
        }
        assert_eq!(buffer.len(), 2);
        let stored: Vec<f32> = (0..2).map(|i| buffer.get(i).unwrap().observation[0]).collect();
        assert!(!stored.contains(&0.0));
    }

    #[test]
    fn episode_start_pads_with_first_observation() {
        let mut buffer = ReplayBuffer::new(10, 1, 1).unwrap();
        buffer.push(transition(7.0, 0, 0)).unwrap();
        let (w, next) = buffer.assemble_window(0, 3).unwrap();
        assert_eq!(w.as_flat(), &[7.0, 7.0, 7.0]);
        assert_eq!(next.as_flat(), &[7.0, 7.0, 8.0]);
    }

    #[test]
    fn eviction_point_acts_as_episode_start() {
        let mut buffer = ReplayBuffer::new(3, 1, 1).unwrap();
        for i in 0..5u64 {
            buffer.push(transition(i as f32, 0, i)).unwrap();
        }
        // Slots now hold steps 3, 4, 2 (2 is the oldest surviving).
        let newest = (0..3).find(|i| buffer.get(*i).unwrap().step_index == 4).unwrap();
        let (w, _) = buffer.assemble_window(newest, 5).unwrap();
        assert_eq!(w.as_flat(), &[2.0, 2.0, 2.0, 3.0, 4.0]);
        assert_eq!(w.valid_count(), 3);
    }

    #[test]
    fn width_and_index_errors() {
        let mut buffer = ReplayBuffer::<f32>::new(3, 2, 1).unwrap();
        assert!(matches!(buffer.push(transition(1.0, 0, 0)), Err(Error::ContractViolation(_))));
        assert!(buffer.assemble_window(0, 2).is_err());
        assert!(ReplayBuffer::<f32>::new(0, 1, 1).is_err());
    }
}
