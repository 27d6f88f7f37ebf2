//! Window assembly checked against an independent reconstruction from the
//! full push log.

mod support;

use histenc_td3::agent::ReplayBuffer;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::windows::{check_all_indices, expected, fill, obs};

#[test]
fn exhaustive_small_buffers() {
    let lengths = [1, 4, 2, 7, 1, 3, 5];
    for h in [1, 3, 5] {
        for capacity in [1, 2, 3, 5, 8, 13, 23, 40] {
            check_all_indices(&lengths, capacity, h).unwrap();
        }
    }
}

#[test]
fn episode_start_and_steady_state_rows() {
    let mut buffer = ReplayBuffer::new(100, 2, 1).unwrap();
    fill(&mut buffer, &[6]);
    let (w0, _) = buffer.assemble_window(0, 3).unwrap();
    assert_eq!(w0.as_flat(), [obs(0, 0), obs(0, 0), obs(0, 0)].concat().as_slice());
    let (w4, _) = buffer.assemble_window(4, 3).unwrap();
    assert_eq!(w4.as_flat(), [obs(0, 2), obs(0, 3), obs(0, 4)].concat().as_slice());
    assert_eq!(w4.valid_count(), 3);
}

#[test]
fn sampled_tuples_match_stored_slices() {
    let lengths = [3, 9, 1, 6, 4];
    let capacity = 17;
    for h in [1, 3, 5] {
        let mut buffer = ReplayBuffer::new(capacity, 2, 1).unwrap();
        let log = fill(&mut buffer, &lengths);
        let mut rng = ChaCha8Rng::seed_from_u64(h as u64);
        let batch = buffer.sample(200, h, &mut rng).unwrap();
        for i in 0..batch.len() {
            let current = batch.windows[i].current();
            let (episode, step) = (current[0] as u64, current[1] as u64);
            let stored = log
                .iter()
                .find(|t| t.episode_id == episode && t.step_index == step)
                .unwrap();
            let (rows, next_rows) = expected(&log, capacity, episode, step, h);
            assert_eq!(batch.windows[i].as_flat(), rows.as_slice());
            assert_eq!(batch.next_windows[i].as_flat(), next_rows.as_slice());
            assert_eq!(batch.actions[i], stored.action);
            assert_eq!(batch.rewards[i], stored.reward);
            assert_eq!(batch.terminated[i], stored.terminated);
        }
    }
}

#[test]
fn truncation_is_not_termination() {
    let mut buffer = ReplayBuffer::new(10, 2, 1).unwrap();
    fill(&mut buffer, &[1, 1]);
    let first = buffer.get(0).unwrap();
    let second = buffer.get(1).unwrap();
    assert!(first.terminated && !first.truncated);
    assert!(!second.terminated && second.truncated);
    let batch = buffer.sample(50, 2, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    for (w, done) in batch.windows.iter().zip(&batch.terminated) {
        assert_eq!(*done, w.current()[0] == 0.0);
    }
}

proptest! {
    #[test]
    fn windows_never_span_episodes(
        lengths in proptest::collection::vec(1u64..10, 1..12),
        capacity in 1usize..30,
        h in 1usize..7,
    ) {
        check_all_indices(&lengths, capacity, h)?;
    }
}
