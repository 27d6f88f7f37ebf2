use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_action, check_mass_scale, ActionBounds, Environment, ObservationAttributeSpec, StepResult};
use crate::{Error, Result};

pub const DT: f64 = 0.05;
pub const MAX_FORCE: f64 = 1.0;
pub const EPISODE_LENGTH: u32 = 200;
pub const DEFAULT_MASS: f64 = 1.0;
pub const BODY: &str = "body";

/// A mass on a frictionless line, pushed toward the origin.
///
/// Observation `[x | v | m | u_prev]`, one component per attribute.
#[derive(Debug, Clone)]
pub struct PointMassEnv {
    position: f64,
    velocity: f64,
    mass: f64,
    last_force: f64,
    steps: u32,
    spec: ObservationAttributeSpec,
    bounds: ActionBounds,
}

impl Default for PointMassEnv {
    fn default() -> Self {
        Self::new()
    }
}

impl PointMassEnv {
    pub fn new() -> Self {
        Self {
            position: 0.0,
            velocity: 0.0,
            mass: DEFAULT_MASS,
            last_force: 0.0,
            steps: 0,
            spec: Self::attribute_spec(),
            bounds: ActionBounds::symmetric(MAX_FORCE, 1),
        }
    }

    pub fn attribute_spec() -> ObservationAttributeSpec {
        ObservationAttributeSpec::from_lengths(1, 1, 1, 1).expect("constant lengths are valid")
    }

    pub fn set_state(&mut self, position: f64, velocity: f64) {
        self.position = position;
        self.velocity = velocity;
        self.last_force = 0.0;
        self.steps = 0;
    }

    pub fn position(&self) -> f64 {
        self.position
    }

    pub fn velocity(&self) -> f64 {
        self.velocity
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn observation(&self) -> Vec<f32> {
        [self.position, self.velocity, self.mass, self.last_force]
            .iter()
            .map(|v| *v as f32)
            .collect()
    }
}

impl Environment for PointMassEnv {
    fn id(&self) -> &str {
        "point-mass"
    }

    fn observation_spec(&self) -> &ObservationAttributeSpec {
        &self.spec
    }

    fn action_bounds(&self) -> &ActionBounds {
        &self.bounds
    }

    fn reset(&mut self, seed: u64) -> Result<Vec<f32>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = rng.random_range(-1.0..1.0);
        self.set_state(x, 0.0);
        Ok(self.observation())
    }

    /// `v <- v + (u/m) dt`, then `x <- x + v dt`; reward on the pre-step state.
    fn step(&mut self, action: &[f32]) -> Result<StepResult> {
        check_action(action, 1)?;
        if self.steps >= EPISODE_LENGTH {
            return Err(Error::contract("point-mass episode already truncated; reset first"));
        }
        let u = (action[0] as f64).clamp(-MAX_FORCE, MAX_FORCE);
        let (x, v) = (self.position, self.velocity);
        let reward = -(x * x + 0.1 * v * v + 0.001 * u * u);
        self.velocity += u / self.mass * DT;
        self.position += self.velocity * DT;
        self.last_force = u;
        self.steps += 1;
        Ok(StepResult {
            observation: self.observation(),
            reward,
            terminated: false,
            truncated: self.steps == EPISODE_LENGTH,
        })
    }

    fn bodies(&self) -> Vec<String> {
        vec![BODY.to_string()]
    }

    fn set_mass_scale(&mut self, body: &str, scale: f64) -> Result<()> {
        check_mass_scale(scale)?;
        if body != BODY {
            return Err(Error::config(format!(
                "unknown body {body:?}; the point mass has [{BODY:?}]"
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
    fn rest_at_origin_stays() {
        let mut env = PointMassEnv::new();
        env.set_state(0.0, 0.0);
        let r = env.step(&[0.0]).unwrap();
        assert_eq!((env.position(), env.velocity(), r.reward), (0.0, 0.0, 0.0));
    }

    #[test]
    fn unit_force_on_unit_and_half_mass() {
        let mut env = PointMassEnv::new();
        env.set_state(0.0, 0.0);
        env.step(&[1.0]).unwrap();
        assert!((env.velocity() - 0.05).abs() < 1e-15);
        assert!((env.position() - 0.05 * 0.05).abs() < 1e-15);

        env.set_mass_scale(BODY, 0.5).unwrap();
        env.set_state(0.0, 0.0);
        env.step(&[1.0]).unwrap();
        assert!((env.velocity() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn force_is_clamped_and_episode_truncates() {
        let mut env = PointMassEnv::new();
        env.reset(0).unwrap();
        let r = env.step(&[-3.0]).unwrap();
        assert_eq!(env.observation()[3], -1.0);
        assert!(!r.truncated);
        for _ in 1..EPISODE_LENGTH - 1 {
            assert!(!env.step(&[0.0]).unwrap().truncated);
        }
        assert!(env.step(&[0.0]).unwrap().truncated);
        assert!(env.step(&[0.0]).is_err());
    }

    #[test]
    fn reset_draws_position_only() {
        let mut env = PointMassEnv::new();
        let obs = env.reset(9).unwrap();
        assert!(obs[0].abs() < 1.0);
        assert_eq!(&obs[1..], &[0.0, 1.0, 0.0]);
        assert_eq!(obs, PointMassEnv::new().reset(9).unwrap());
    }
}
