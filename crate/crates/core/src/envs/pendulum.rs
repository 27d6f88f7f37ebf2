use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_action, check_mass_scale, ActionBounds, Environment, ObservationAttributeSpec, StepResult};
use crate::{Error, Result};

pub const GRAVITY: f64 = 10.0;
pub const DT: f64 = 0.05;
pub const MAX_TORQUE: f64 = 2.0;
pub const MAX_SPEED: f64 = 8.0;
pub const EPISODE_LENGTH: u32 = 200;
pub const DEFAULT_MASS: f64 = 1.0;
pub const DEFAULT_LENGTH: f64 = 1.0;
pub const POLE: &str = "pole";

/// Torque-limited inverted pendulum, angle measured from upright.
///
/// Observation `[cos θ, sin θ | θ̇ | m, l | u_prev]` with segments
/// position (2), velocity (1), mass/inertia (2), force (1).
#[derive(Debug, Clone)]
pub struct PendulumEnv {
    theta: f64,
    theta_dot: f64,
    mass: f64,
    length: f64,
    last_torque: f64,
    steps: u32,
    spec: ObservationAttributeSpec,
    bounds: ActionBounds,
}

/// Maps an angle to `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    PI - (PI - theta).rem_euclid(2.0 * PI)
}

impl Default for PendulumEnv {
    fn default() -> Self {
        Self::new()
    }
}

impl PendulumEnv {
    pub fn new() -> Self {
        Self {
            theta: 0.0,
            theta_dot: 0.0,
            mass: DEFAULT_MASS,
            length: DEFAULT_LENGTH,
            last_torque: 0.0,
            steps: 0,
            spec: Self::attribute_spec(),
            bounds: ActionBounds::symmetric(MAX_TORQUE, 1),
        }
    }

    pub fn attribute_spec() -> ObservationAttributeSpec {
        ObservationAttributeSpec::from_lengths(2, 1, 2, 1).expect("constant lengths are valid")
    }

    /// Places the pendulum in an arbitrary state and restarts the step counter.
    pub fn set_state(&mut self, theta: f64, theta_dot: f64) {
        self.theta = theta;
        self.theta_dot = theta_dot;
        self.last_torque = 0.0;
        self.steps = 0;
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn theta_dot(&self) -> f64 {
        self.theta_dot
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    pub fn observation(&self) -> Vec<f32> {
        [
            self.theta.cos(),
            self.theta.sin(),
            self.theta_dot,
            self.mass,
            self.length,
            self.last_torque,
        ]
        .iter()
        .map(|v| *v as f32)
        .collect()
    }
}

impl Environment for PendulumEnv {
    fn id(&self) -> &str {
        "pendulum"
    }

    fn observation_spec(&self) -> &ObservationAttributeSpec {
        &self.spec
    }

    fn action_bounds(&self) -> &ActionBounds {
        &self.bounds
    }

    fn reset(&mut self, seed: u64) -> Result<Vec<f32>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta = rng.random_range(-PI..PI);
        let theta_dot = rng.random_range(-1.0..1.0);
        self.set_state(theta, theta_dot);
        Ok(self.observation())
    }

    /// Semi-implicit Euler: `θ̇` is updated (and clamped) first, then `θ`
    /// moves with the new `θ̇`. The reward is charged on the pre-step state
    /// and the clamped torque.
    fn step(&mut self, action: &[f32]) -> Result<StepResult> {
        check_action(action, 1)?;
        if self.steps >= EPISODE_LENGTH {
            return Err(Error::contract("pendulum episode already truncated; reset first"));
        }
        let u = (action[0] as f64).clamp(-MAX_TORQUE, MAX_TORQUE);
        let angle = wrap_angle(self.theta);
        let reward = -(angle * angle + 0.1 * self.theta_dot * self.theta_dot + 0.001 * u * u);

        let (m, l) = (self.mass, self.length);
        let accel = 3.0 * GRAVITY / (2.0 * l) * self.theta.sin() + 3.0 / (m * l * l) * u;
        self.theta_dot = (self.theta_dot + accel * DT).clamp(-MAX_SPEED, MAX_SPEED);
        self.theta += self.theta_dot * DT;
        self.last_torque = u;
        self.steps += 1;

        Ok(StepResult {
            observation: self.observation(),
            reward,
            terminated: false,
            truncated: self.steps == EPISODE_LENGTH,
        })
    }

    fn bodies(&self) -> Vec<String> {
        vec![POLE.to_string()]
    }

    fn set_mass_scale(&mut self, body: &str, scale: f64) -> Result<()> {
        check_mass_scale(scale)?;
        if body != POLE {
            return Err(Error::config(format!(
                "unknown body {body:?}; the pendulum has [{POLE:?}]"
            )));
        }
        self.mass = DEFAULT_MASS * scale;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upright_equilibrium_is_fixed() {
        let mut env = PendulumEnv::new();
        env.set_state(0.0, 0.0);
        let r = env.step(&[0.0]).unwrap();
        assert_eq!((env.theta(), env.theta_dot()), (0.0, 0.0));
        assert_eq!(r.reward, 0.0);
        assert!(!r.terminated && !r.truncated);
    }

    #[test]
    fn hanging_down_is_an_equilibrium_up_to_sin_pi() {
        let mut env = PendulumEnv::new();
        env.set_state(PI, 0.0);
        let r = env.step(&[0.0]).unwrap();
        assert_eq!(r.reward, -PI * PI);
        // sin(π) is 1.2e-16 in floating point, so θ̇ moves by ~1e-16 only.
        assert!(env.theta_dot().abs() < 1e-15);
        assert!((env.theta() - PI).abs() < 1e-15);
    }

    #[test]
    fn quarter_turn_step_matches_hand_integration() {
        let mut env = PendulumEnv::new();
        env.set_state(PI / 2.0, 0.0);
        env.step(&[0.0]).unwrap();
        assert!((env.theta_dot() - 0.75).abs() < 1e-12);
        assert!((env.theta() - (PI / 2.0 + 0.75 * 0.05)).abs() < 1e-12);
    }

    #[test]
    fn torque_and_speed_are_clamped() {
        let mut env = PendulumEnv::new();
        env.set_state(0.0, 7.99);
        let r = env.step(&[100.0]).unwrap();
        assert_eq!(env.theta_dot(), MAX_SPEED);
        assert_eq!(*env.observation().last().unwrap(), 2.0);
        assert!((r.reward - -(0.1 * 7.99 * 7.99 + 0.001 * 4.0)).abs() < 1e-12);
    }

    #[test]
    fn truncates_at_episode_length_and_refuses_more_steps() {
        let mut env = PendulumEnv::new();
        env.reset(3).unwrap();
        for i in 1..=EPISODE_LENGTH {
            let r = env.step(&[0.5]).unwrap();
            assert_eq!(r.truncated, i == EPISODE_LENGTH);
        }
        assert!(matches!(env.step(&[0.0]), Err(Error::ContractViolation(_))));
        env.reset(4).unwrap();
        assert!(env.step(&[0.0]).is_ok());
    }

    #[test]
    fn rejects_non_finite_actions() {
        let mut env = PendulumEnv::new();
        assert!(matches!(env.step(&[f32::NAN]), Err(Error::ContractViolation(_))));
        assert!(matches!(env.step(&[0.0, 0.0]), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn reset_is_seed_deterministic() {
        let mut a = PendulumEnv::new();
        let mut b = PendulumEnv::new();
        assert_eq!(a.reset(17).unwrap(), b.reset(17).unwrap());
        assert_ne!(a.reset(17).unwrap(), a.reset(18).unwrap());
        assert_eq!(a.reset(1).unwrap().len(), 6);
    }

    #[test]
    fn mass_scaling_uses_defaults() {
        let mut env = PendulumEnv::new();
        env.set_mass_scale(POLE, 0.5).unwrap();
        env.set_mass_scale(POLE, 0.5).unwrap();
        assert_eq!(env.mass(), 0.5);
        assert!(matches!(env.set_mass_scale("arm", 0.5), Err(Error::Config(_))));
        assert!(env.set_mass_scale(POLE, 0.0).is_err());
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_angle(0.25), 0.25);
    }
}
