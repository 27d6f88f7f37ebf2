use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Environment;
use crate::{Error, Result};

/// Periodic resampling of body masses during training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomizationSchedule {
    /// Steps between resamples; fires at every positive multiple.
    pub period: u64,
    pub scale_low: f64,
    pub scale_high: f64,
    /// Bodies to resample; empty means every body the environment reports.
    pub targets: Vec<String>,
}

impl Default for RandomizationSchedule {
    fn default() -> Self {
        Self {
            period: 10_000,
            scale_low: 0.5,
            scale_high: 1.0,
            targets: Vec::new(),
        }
    }
}

/// One applied mass change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassChange {
    pub global_step: u64,
    pub body: String,
    pub scale: f64,
}

impl RandomizationSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.period == 0 {
            return Err(Error::config("randomization period must be positive"));
        }
        if !(self.scale_low > 0.0 && self.scale_low <= self.scale_high && self.scale_high.is_finite()) {
            return Err(Error::config(format!(
                "randomization range needs 0 < low <= high, got [{}, {}]",
                self.scale_low, self.scale_high
            )));
        }
        Ok(())
    }

    pub fn fires_at(&self, global_step: u64) -> bool {
        global_step > 0 && global_step % self.period == 0
    }

    /// The bodies this schedule acts on, checked against `env`.
    pub fn resolve_targets(&self, env: &dyn Environment) -> Result<Vec<String>> {
        let bodies = env.bodies();
        if self.targets.is_empty() {
            return Ok(bodies);
        }
        for target in &self.targets {
            if !bodies.contains(target) {
                return Err(Error::config(format!(
                    "unknown body {target:?}; {} has {bodies:?}",
                    env.id()
                )));
            }
        }
        Ok(self.targets.clone())
    }
}

/// Resamples every target body's mass as `default * Uniform(low, high)` when
/// `global_step` is a positive multiple of the period; otherwise does nothing.
pub fn randomize_masses<R: Rng + ?Sized>(
    env: &mut dyn Environment,
    schedule: &RandomizationSchedule,
    rng: &mut R,
    global_step: u64,
) -> Result<Vec<MassChange>> {
    schedule.validate()?;
    if !schedule.fires_at(global_step) {
        return Ok(Vec::new());
    }
    let targets = schedule.resolve_targets(env)?;
    let mut changes = Vec::with_capacity(targets.len());
    for body in targets {
        let scale = if schedule.scale_low == schedule.scale_high {
            schedule.scale_low
        } else {
            rng.random_range(schedule.scale_low..schedule.scale_high)
        };
        env.set_mass_scale(&body, scale)?;
        changes.push(MassChange {
            global_step,
            body,
            scale,
        });
    }
    Ok(changes)
}
