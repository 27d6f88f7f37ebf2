use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::config::Td3Config;
use super::networks::{ActorNetwork, CriticNetwork};
use super::replay::{Batch, ReplayBuffer};
use crate::encoder::{EncoderConfig, HistoryWindow};
use crate::envs::ActionBounds;
use crate::error::check_width;
use crate::nn::{derive_seed, polyak_update, AdamConfig, AdamState, Scalar};
use crate::{Error, Result};

/// Actor, twin critics, their targets and optimizer state.
///
/// Parameter vectors are public so callers can inspect or checkpoint them;
/// their layouts belong to [`ActorNetwork`] and [`CriticNetwork`].
#[derive(Debug, Clone)]
pub struct Td3Bundle<T> {
    config: Td3Config,
    actor_net: ActorNetwork,
    critic_net: CriticNetwork,
    pub actor: Vec<T>,
    pub critic1: Vec<T>,
    pub critic2: Vec<T>,
    pub actor_target: Vec<T>,
    pub critic1_target: Vec<T>,
    pub critic2_target: Vec<T>,
    pub actor_adam: AdamState<T>,
    pub critic1_adam: AdamState<T>,
    pub critic2_adam: AdamState<T>,
    pub update_count: u64,
}

/// Pieces of a clipped double-Q target.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticTarget<T> {
    /// `reward + discount * (1 - terminated) * bootstrap`.
    pub value: T,
    /// `min(q1, q2)`.
    pub bootstrap: T,
    pub q1: T,
    pub q2: T,
    pub smoothed_action: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateDiagnostics {
    pub update_count: u64,
    pub critic1_loss: f64,
    pub critic2_loss: f64,
    /// Present only on updates where the actor moved.
    pub actor_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum UpdateOutcome {
    /// The buffer holds fewer than `batch_size` transitions; nothing changed.
    Skipped { needed: usize, available: usize },
    Updated(UpdateDiagnostics),
}

impl<T: Scalar> Td3Bundle<T> {
    pub fn new(
        obs_width: usize,
        encoder: EncoderConfig,
        config: Td3Config,
        bounds: ActionBounds,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        encoder.validate()?;
        let action_width = bounds.width();
        let actor_net = ActorNetwork::new(encoder.clone(), obs_width, &config.actor_hidden, bounds)?;
        let critic_net = CriticNetwork::new(encoder, obs_width, &config.critic_hidden, action_width)?;
        let actor: Vec<T> = actor_net.init(derive_seed(seed, 10));
        let critic1: Vec<T> = critic_net.init(derive_seed(seed, 11));
        let critic2: Vec<T> = critic_net.init(derive_seed(seed, 12));
        Ok(Self {
            actor_adam: AdamState::new(actor.len(), AdamConfig::with_learning_rate(config.actor_lr)),
            critic1_adam: AdamState::new(critic1.len(), AdamConfig::with_learning_rate(config.critic_lr)),
            critic2_adam: AdamState::new(critic2.len(), AdamConfig::with_learning_rate(config.critic_lr)),
            actor_target: actor.clone(),
            critic1_target: critic1.clone(),
            critic2_target: critic2.clone(),
            actor,
            critic1,
            critic2,
            config,
            actor_net,
            critic_net,
            update_count: 0,
        })
    }

    /// Rebuilds a bundle from stored parts, checking every width.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        config: Td3Config,
        actor_net: ActorNetwork,
        critic_net: CriticNetwork,
        params: [Vec<T>; 6],
        adam: [AdamState<T>; 3],
        update_count: u64,
    ) -> Result<Self> {
        let [actor, critic1, critic2, actor_target, critic1_target, critic2_target] = params;
        let [actor_adam, critic1_adam, critic2_adam] = adam;
        for (what, len) in [("actor", actor.len()), ("actor target", actor_target.len())] {
            check_width(what, actor_net.param_count(), len)?;
        }
        for (what, len) in [
            ("critic1", critic1.len()),
            ("critic2", critic2.len()),
            ("critic1 target", critic1_target.len()),
            ("critic2 target", critic2_target.len()),
        ] {
            check_width(what, critic_net.param_count(), len)?;
        }
        Ok(Self {
            config,
            actor_net,
            critic_net,
            actor,
            critic1,
            critic2,
            actor_target,
            critic1_target,
            critic2_target,
            actor_adam,
            critic1_adam,
            critic2_adam,
            update_count,
        })
    }

    pub fn config(&self) -> &Td3Config {
        &self.config
    }

    pub fn actor_network(&self) -> &ActorNetwork {
        &self.actor_net
    }

    pub fn critic_network(&self) -> &CriticNetwork {
        &self.critic_net
    }

    pub fn window_length(&self) -> usize {
        self.actor_net.encoder().window_length()
    }

    pub fn obs_width(&self) -> usize {
        self.actor_net.encoder().obs_width()
    }

    pub fn action_bounds(&self) -> &ActionBounds {
        self.actor_net.bounds()
    }

    fn clamp_action(&self, action: &mut [T]) {
        let bounds = self.actor_net.bounds();
        for (a, (l, h)) in action.iter_mut().zip(bounds.low.iter().zip(&bounds.high)) {
            *a = a.max(T::lit(*l)).min(T::lit(*h));
        }
    }

    /// The actor's action for `window`, with Gaussian exploration noise of
    /// std `exploration_noise * half_range` when `explore` is set, clamped to
    /// the action bounds.
    pub fn select_action<R: Rng + ?Sized>(&self, window: &HistoryWindow<T>, explore: bool, rng: &mut R) -> Result<Vec<T>> {
        let mut action = self.actor_net.act(&self.actor, window)?;
        if explore && self.config.exploration_noise > 0.0 {
            let bounds = self.actor_net.bounds();
            for (a, (l, h)) in action.iter_mut().zip(bounds.low.iter().zip(&bounds.high)) {
                let std = self.config.exploration_noise * (h - l) / 2.0;
                let noise = Normal::new(0.0, std).map_err(|e| Error::config(e.to_string()))?;
                *a = *a + T::lit(noise.sample(rng));
            }
        }
        self.clamp_action(&mut action);
        Ok(action)
    }

    /// One draw of target-policy smoothing noise, clipped to `±noise_clip`.
    pub fn smoothing_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let clip = self.config.noise_clip;
        (0..self.actor_net.action_width())
            .map(|_| {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                T::lit((z * self.config.policy_noise).clamp(-clip, clip))
            })
            .collect()
    }

    pub fn compute_critic_target<R: Rng + ?Sized>(
        &self,
        next_window: &HistoryWindow<T>,
        reward: T,
        terminated: bool,
        rng: &mut R,
    ) -> Result<CriticTarget<T>> {
        let mut smoothed_action = self.actor_net.act(&self.actor_target, next_window)?;
        for (a, n) in smoothed_action.iter_mut().zip(self.smoothing_noise(rng)) {
            *a = *a + n;
        }
        self.clamp_action(&mut smoothed_action);
        let q1 = self.critic_net.q(&self.critic1_target, next_window, &smoothed_action)?;
        let q2 = self.critic_net.q(&self.critic2_target, next_window, &smoothed_action)?;
        let bootstrap = q1.min(q2);
        let value = if terminated {
            reward
        } else {
            reward + T::lit(self.config.discount) * bootstrap
        };
        Ok(CriticTarget {
            value,
            bootstrap,
            q1,
            q2,
            smoothed_action,
        })
    }

    /// Clipped double-Q targets for a whole batch. Smoothing noise is drawn
    /// sample by sample in batch order, as [`Td3Bundle::compute_critic_target`]
    /// would draw it.
    pub fn compute_critic_targets<R: Rng + ?Sized>(&self, batch: &Batch<T>, rng: &mut R) -> Result<Vec<T>> {
        let actor = self.actor_net.forward_batch(&self.actor_target, &batch.next_windows)?;
        let width = self.actor_net.action_width();
        let mut actions = actor.actions().to_vec();
        for row in actions.chunks_exact_mut(width) {
            for (a, n) in row.iter_mut().zip(self.smoothing_noise(rng)) {
                *a = *a + n;
            }
            self.clamp_action(row);
        }
        let q1 = self.critic_net.forward_batch(&self.critic1_target, &batch.next_windows, &actions)?;
        let q2 = self.critic_net.forward_batch(&self.critic2_target, &batch.next_windows, &actions)?;
        let discount = T::lit(self.config.discount);
        Ok(q1
            .values()
            .iter()
            .zip(q2.values())
            .zip(batch.rewards.iter().zip(&batch.terminated))
            .map(|((a, b), (r, done))| if *done { *r } else { *r + discount * a.min(*b) })
            .collect())
    }

    /// Mean squared error of one critic against `targets`, and its gradient.
    pub fn critic_loss_and_gradients(&self, critic: &[T], batch: &Batch<T>, targets: &[T]) -> Result<(T, Vec<T>)> {
        check_width("critic targets", batch.len(), targets.len())?;
        if batch.is_empty() {
            return Err(Error::contract("critic loss needs a non-empty batch"));
        }
        let n = T::lit(batch.len() as f64);
        let actions: Vec<T> = batch.actions.iter().flatten().copied().collect();
        let trace = self.critic_net.forward_batch(critic, &batch.windows, &actions)?;
        let errors: Vec<T> = trace.values().iter().zip(targets).map(|(q, y)| *q - *y).collect();
        let loss = errors.iter().fold(T::zero(), |acc, e| acc + *e * *e) / n;
        let upstream: Vec<T> = errors.iter().map(|e| T::lit(2.0) * *e / n).collect();
        let mut grads = vec![T::zero(); critic.len()];
        self.critic_net.backward_batch(critic, &trace, &upstream, &mut grads)?;
        Ok((loss, grads))
    }

    /// `-mean Q1(w, actor(w))` over `windows`, and its gradient with respect
    /// to the actor parameters.
    pub fn actor_loss_and_gradients(
        &self,
        actor: &[T],
        critic1: &[T],
        windows: &[HistoryWindow<T>],
    ) -> Result<(T, Vec<T>)> {
        if windows.is_empty() {
            return Err(Error::contract("actor loss needs a non-empty batch"));
        }
        let n = T::lit(windows.len() as f64);
        let actor_trace = self.actor_net.forward_batch(actor, windows)?;
        let critic_trace = self
            .critic_net
            .forward_batch(critic1, windows, actor_trace.actions())?;
        let loss = -critic_trace.values().iter().fold(T::zero(), |acc, q| acc + *q) / n;
        let upstream = vec![-T::one() / n; windows.len()];
        let action_grad = self
            .critic_net
            .action_gradient_batch(critic1, &critic_trace, &upstream)?;
        let mut grads = vec![T::zero(); actor.len()];
        self.actor_net
            .backward_batch(actor, &actor_trace, &action_grad, &mut grads)?;
        Ok((loss, grads))
    }

    /// One gradient step: both critics every call, the actor and all targets
    /// when the incremented counter is a multiple of `policy_delay`.
    pub fn update_step<R: Rng + ?Sized>(&mut self, buffer: &ReplayBuffer<T>, rng: &mut R) -> Result<UpdateOutcome> {
        let needed = self.config.batch_size;
        if buffer.len() < needed {
            return Ok(UpdateOutcome::Skipped {
                needed,
                available: buffer.len(),
            });
        }
        let batch = buffer.sample(needed, self.window_length(), rng)?;
        let targets = self.compute_critic_targets(&batch, rng)?;
        let (critic1_loss, grads1) = self.critic_loss_and_gradients(&self.critic1, &batch, &targets)?;
        let (critic2_loss, grads2) = self.critic_loss_and_gradients(&self.critic2, &batch, &targets)?;
        self.critic1_adam.step(&mut self.critic1, &grads1)?;
        self.critic2_adam.step(&mut self.critic2, &grads2)?;

        self.update_count += 1;
        let mut actor_loss = None;
        if self.update_count % self.config.policy_delay == 0 {
            let (loss, grads) = self.actor_loss_and_gradients(&self.actor, &self.critic1, &batch.windows)?;
            self.actor_adam.step(&mut self.actor, &grads)?;
            let tau = T::lit(self.config.tau);
            polyak_update(&mut self.actor_target, &self.actor, tau)?;
            polyak_update(&mut self.critic1_target, &self.critic1, tau)?;
            polyak_update(&mut self.critic2_target, &self.critic2, tau)?;
            actor_loss = Some(loss.as_f64());
        }
        Ok(UpdateOutcome::Updated(UpdateDiagnostics {
            update_count: self.update_count,
            critic1_loss: critic1_loss.as_f64(),
            critic2_loss: critic2_loss.as_f64(),
            actor_loss,
        }))
    }
}
