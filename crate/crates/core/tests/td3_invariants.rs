mod support;

use histenc_td3::agent::{ReplayBuffer, Td3Config, Transition, UpdateOutcome};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::td3::{bounds, bundle, buffer, config, constant_critic, window};

#[test]
fn greedy_actions_are_deterministic_and_noise_free_with_zero_sigma() {
    let agent = bundle::<f32>(config(), 1);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let w = window(&mut rng);
    let a = agent.select_action(&w, false, &mut rng).unwrap();
    let b = agent.select_action(&w, false, &mut rng).unwrap();
    assert_eq!(a, b);

    let quiet = bundle::<f32>(Td3Config { exploration_noise: 0.0, ..config() }, 1);
    assert_eq!(quiet.select_action(&w, true, &mut rng).unwrap(), a);
}

#[test]
fn explored_actions_stay_in_bounds() {
    let agent = bundle::<f32>(Td3Config { exploration_noise: 3.0, ..config() }, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let w = window(&mut rng);
    let b = bounds();
    for _ in 0..10_000 {
        let a = agent.select_action(&w, true, &mut rng).unwrap();
        for (x, (l, h)) in a.iter().zip(b.low.iter().zip(&b.high)) {
            assert!((*l as f32..=*h as f32).contains(x), "{x} outside [{l}, {h}]");
        }
    }
}

#[test]
fn smoothing_noise_is_clipped() {
    for policy_noise in [0.2, 2.0] {
        let agent = bundle::<f32>(Td3Config { policy_noise, ..config() }, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut hit_clip = false;
        for _ in 0..10_000 {
            for n in agent.smoothing_noise(&mut rng) {
                assert!(n.abs() <= 0.5, "noise {n}");
                hit_clip |= n.abs() == 0.5;
            }
        }
        assert!(hit_clip, "clipping never engaged");
    }
}

#[test]
fn bellman_target_arithmetic() {
    let mut agent = bundle::<f64>(config(), 4);
    let mut t1 = agent.critic1_target.clone();
    let mut t2 = agent.critic2_target.clone();
    constant_critic(&agent, &mut t1, 2.0);
    constant_critic(&agent, &mut t2, 5.0);
    agent.critic1_target = t1;
    agent.critic2_target = t2;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = window(&mut rng);
    let live = agent.compute_critic_target(&w, 1.0, false, &mut rng).unwrap();
    assert_eq!(live.bootstrap, 2.0);
    assert!((live.value - 2.98).abs() < 1e-12);
    let done = agent.compute_critic_target(&w, 1.0, true, &mut rng).unwrap();
    assert_eq!(done.value, 1.0);
}

#[test]
fn policy_delay_gates_actor_and_targets() {
    for delay in [2u64, 3] {
        let mut agent = bundle::<f32>(Td3Config { policy_delay: delay, ..config() }, 5);
        let buf = buffer(5);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for update in 1..=9u64 {
            let (actor, target) = (agent.actor.clone(), agent.critic1_target.clone());
            let critic = agent.critic1.clone();
            let outcome = agent.update_step(&buf, &mut rng).unwrap();
            let UpdateOutcome::Updated(diag) = outcome else { panic!("skipped") };
            assert_eq!(diag.update_count, update);
            assert_ne!(agent.critic1, critic, "critics move every update");
            let moves = update % delay == 0;
            assert_eq!(agent.actor != actor, moves, "update {update}");
            assert_eq!(agent.critic1_target != target, moves, "update {update}");
            assert_eq!(diag.actor_loss.is_some(), moves);
        }
    }
}

#[test]
fn zero_tau_freezes_targets() {
    let mut agent = bundle::<f32>(Td3Config { tau: 0.0, policy_delay: 1, ..config() }, 6);
    let frozen = (agent.actor_target.clone(), agent.critic1_target.clone(), agent.critic2_target.clone());
    let buf = buffer(6);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..6 {
        agent.update_step(&buf, &mut rng).unwrap();
    }
    assert_ne!(agent.actor, frozen.0);
    assert_eq!((agent.actor_target.clone(), agent.critic1_target.clone(), agent.critic2_target.clone()), frozen);
}

#[test]
fn unit_tau_copies_online_networks() {
    let mut agent = bundle::<f32>(Td3Config { tau: 1.0, policy_delay: 1, ..config() }, 8);
    let buf = buffer(8);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    agent.update_step(&buf, &mut rng).unwrap();
    assert_eq!(agent.actor_target, agent.actor);
    assert_eq!(agent.critic1_target, agent.critic1);
    assert_eq!(agent.critic2_target, agent.critic2);
}

#[test]
fn seeded_update_batch_matches_finite_differences() {
    let agent = bundle::<f32>(config(), 7);
    let buf = buffer(7);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let batch = buf.sample(agent.config().batch_size, agent.window_length(), &mut rng).unwrap();
    let targets = agent.compute_critic_targets(&batch, &mut rng).unwrap();
    let (_, grads) = agent.critic_loss_and_gradients(&agent.critic1, &batch, &targets).unwrap();

    let agent64 = bundle::<f64>(config(), 7);
    let batch64 = histenc_td3::agent::Batch {
        windows: batch.windows.iter().map(|w| w.cast()).collect(),
        actions: batch.actions.iter().map(|a| a.iter().map(|v| *v as f64).collect()).collect(),
        rewards: batch.rewards.iter().map(|v| *v as f64).collect(),
        next_windows: batch.next_windows.iter().map(|w| w.cast()).collect(),
        terminated: batch.terminated.clone(),
    };
    let targets64: Vec<f64> = targets.iter().map(|v| *v as f64).collect();
    let critic64: Vec<f64> = agent.critic1.iter().map(|v| *v as f64).collect();
    let err = support::compare(
        &grads,
        &critic64,
        |p| agent64.critic_loss_and_gradients(p, &batch64, &targets64).unwrap().0,
        &mut rng,
    )
    .expect("the seeded batch sits on a ReLU kink");
    assert!(err <= support::TOL_F32, "relative error {err:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bootstrap_never_exceeds_either_target_critic(seed in any::<u64>(), reward in -5.0f64..5.0) {
        let mut agent = bundle::<f64>(config(), seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in agent.critic2_target.iter_mut() {
            *p += rng.random_range(-0.3..0.3);
        }
        for _ in 0..8 {
            let w = window(&mut rng);
            let t = agent.compute_critic_target(&w, reward, false, &mut rng).unwrap();
            prop_assert!(t.bootstrap <= t.q1 && t.bootstrap <= t.q2);
            prop_assert_eq!(t.bootstrap, t.q1.min(t.q2));
        }
    }

    #[test]
    fn targets_contract_toward_online_networks(seed in any::<u64>(), tau in 0.01f64..0.99) {
        let mut agent = bundle::<f64>(Td3Config { tau, policy_delay: 1, batch_size: 4, ..config() }, seed);
        let buf = buffer(seed);
        let buf64 = {
            let mut b = ReplayBuffer::<f64>::new(500, 2, 2).unwrap();
            for i in 0..buf.len() {
                let t = buf.get(i).unwrap();
                let cast = |v: &[f32]| v.iter().map(|x| *x as f64).collect::<Vec<f64>>();
                b.push(Transition {
                    observation: cast(&t.observation),
                    action: cast(&t.action),
                    reward: t.reward as f64,
                    next_observation: cast(&t.next_observation),
                    terminated: t.terminated,
                    truncated: t.truncated,
                    episode_id: t.episode_id,
                    step_index: t.step_index,
                }).unwrap();
            }
            b
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..3 {
            let before = [agent.actor_target.clone(), agent.critic1_target.clone(), agent.critic2_target.clone()];
            agent.update_step(&buf64, &mut rng).unwrap();
            let after = [&agent.actor_target, &agent.critic1_target, &agent.critic2_target];
            let online = [&agent.actor, &agent.critic1, &agent.critic2];
            for ((old, new), src) in before.iter().zip(after).zip(online) {
                for ((o, n), s) in old.iter().zip(new).zip(src) {
                    let bound = (1.0 - tau) * (o - s).abs();
                    prop_assert!((n - s).abs() <= bound + 1e-12 * (1.0 + s.abs()));
                }
            }
        }
    }
}
