//! Environments with attribute-tagged observations.
//!
//! Every environment reports an [`ObservationAttributeSpec`] describing which
//! slice of its observation holds positions, velocities, mass/inertia terms
//! and forces. Partial observability is produced by [`MaskedEnv`], which
//! drops whole attribute segments from the observation while the simulation
//! keeps running on the full state.

mod attributes;
mod masked;
mod pendulum;
mod point_mass;
mod randomization;
mod remote;
mod segment_map;

pub use attributes::{apply_mask, masked_dim, Attribute, ObsMask, ObservationAttributeSpec, Segment};
pub use masked::MaskedEnv;
pub use pendulum::PendulumEnv;
pub use point_mass::PointMassEnv;
pub use randomization::{randomize_masses, MassChange, RandomizationSchedule};
pub use remote::{RemoteEnv, HUMANOID_BODIES};
pub use segment_map::{SegmentEntry, SegmentMap};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Outcome of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Vec<f32>,
    pub reward: f64,
    /// The episode reached a failure/terminal state (no bootstrapping).
    pub terminated: bool,
    /// The episode hit its time limit.
    pub truncated: bool,
}

impl StepResult {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

/// Per-component action limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionBounds {
    pub low: Vec<f64>,
    pub high: Vec<f64>,
}

impl ActionBounds {
    pub fn new(low: Vec<f64>, high: Vec<f64>) -> Result<Self> {
        if low.is_empty() || low.len() != high.len() {
            return Err(Error::config("action bounds need matching, non-empty low/high"));
        }
        if low.iter().zip(&high).any(|(l, h)| !(l < h)) {
            return Err(Error::config("every action low bound must be below its high bound"));
        }
        Ok(Self { low, high })
    }

    pub fn symmetric(limit: f64, width: usize) -> Self {
        Self::new(vec![-limit; width], vec![limit; width]).expect("positive symmetric limit")
    }

    pub fn width(&self) -> usize {
        self.low.len()
    }

    pub fn clamp(&self, action: &mut [f32]) {
        for ((a, l), h) in action.iter_mut().zip(&self.low).zip(&self.high) {
            *a = a.clamp(*l as f32, *h as f32);
        }
    }
}

/// A single-user environment instance.
pub trait Environment: Send {
    fn id(&self) -> &str;

    /// Layout of the observations this instance returns (after any masking).
    fn observation_spec(&self) -> &ObservationAttributeSpec;

    fn observation_width(&self) -> usize {
        self.observation_spec().total_dim()
    }

    fn action_bounds(&self) -> &ActionBounds;

    /// Starts a new episode; identical seeds give identical initial observations.
    fn reset(&mut self, seed: u64) -> Result<Vec<f32>>;

    fn step(&mut self, action: &[f32]) -> Result<StepResult>;

    /// Identifiers accepted by [`Environment::set_mass_scale`].
    fn bodies(&self) -> Vec<String>;

    /// Sets a body's mass to `scale` times its default mass.
    fn set_mass_scale(&mut self, body: &str, scale: f64) -> Result<()>;
}

impl<E: Environment + ?Sized> Environment for Box<E> {
    fn id(&self) -> &str {
        (**self).id()
    }
    fn observation_spec(&self) -> &ObservationAttributeSpec {
        (**self).observation_spec()
    }
    fn action_bounds(&self) -> &ActionBounds {
        (**self).action_bounds()
    }
    fn reset(&mut self, seed: u64) -> Result<Vec<f32>> {
        (**self).reset(seed)
    }
    fn step(&mut self, action: &[f32]) -> Result<StepResult> {
        (**self).step(action)
    }
    fn bodies(&self) -> Vec<String> {
        (**self).bodies()
    }
    fn set_mass_scale(&mut self, body: &str, scale: f64) -> Result<()> {
        (**self).set_mass_scale(body, scale)
    }
}

pub(crate) fn check_action(action: &[f32], width: usize) -> Result<()> {
    if action.len() != width {
        return Err(Error::contract(format!(
            "action has width {}, environment expects {width}",
            action.len()
        )));
    }
    if action.iter().any(|a| !a.is_finite()) {
        return Err(Error::contract("action components must be finite"));
    }
    Ok(())
}

pub(crate) fn check_mass_scale(scale: f64) -> Result<()> {
    if scale.is_finite() && scale > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("mass scale must be positive and finite, got {scale}")))
    }
}

/// Which environment to build, and how to observe it.
///
/// Built-in ids are `pendulum` and `point-mass`. Any other id is treated as a
/// remote environment served over the bridge protocol at `endpoint`, with its
/// layout described by `segment_map`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub id: String,
    #[serde(default)]
    pub mask: ObsMask,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment_map: Option<PathBuf>,
}

impl EnvSpec {
    pub fn builtin(id: &str, mask: ObsMask) -> Self {
        Self {
            id: id.to_string(),
            mask,
            endpoint: None,
            segment_map: None,
        }
    }

    /// Whether `id` names one of the in-process environments.
    pub fn is_builtin(&self) -> bool {
        self.builtin_kind().is_some()
    }

    fn builtin_kind(&self) -> Option<Builtin> {
        match self.id.to_ascii_lowercase().as_str() {
            "pendulum" => Some(Builtin::Pendulum),
            "point-mass" | "point_mass" | "pointmass" => Some(Builtin::PointMass),
            _ => None,
        }
    }

    /// The unmasked attribute layout, without connecting to anything.
    ///
    /// Remote ids use their segment map when given; ids starting with
    /// `humanoid` fall back to the 22/101/130/95 decomposition.
    pub fn full_attribute_spec(&self) -> Result<ObservationAttributeSpec> {
        match self.builtin_kind() {
            Some(Builtin::Pendulum) => Ok(PendulumEnv::attribute_spec()),
            Some(Builtin::PointMass) => Ok(PointMassEnv::attribute_spec()),
            None => {
                if let Some(path) = &self.segment_map {
                    SegmentMap::load(path)?.attribute_spec()
                } else if self.id.to_ascii_lowercase().starts_with("humanoid") {
                    Ok(ObservationAttributeSpec::humanoid())
                } else {
                    Err(Error::config(format!(
                        "unknown environment {:?} and no segment map given",
                        self.id
                    )))
                }
            }
        }
    }

    pub fn build(&self) -> Result<Box<dyn Environment>> {
        match self.builtin_kind() {
            Some(Builtin::Pendulum) => Ok(Box::new(MaskedEnv::new(PendulumEnv::new(), self.mask.clone())?)),
            Some(Builtin::PointMass) => Ok(Box::new(MaskedEnv::new(PointMassEnv::new(), self.mask.clone())?)),
            None => {
                let endpoint = self.endpoint.as_deref().ok_or_else(|| {
                    Error::config(format!("remote environment {:?} needs an endpoint", self.id))
                })?;
                let map_path = self.segment_map.as_ref().ok_or_else(|| {
                    Error::config(format!("remote environment {:?} needs a segment map", self.id))
                })?;
                let map = SegmentMap::load(map_path)?;
                Ok(Box::new(RemoteEnv::connect(endpoint, &self.id, &map, &self.mask)?))
            }
        }
    }
}

enum Builtin {
    Pendulum,
    PointMass,
}
