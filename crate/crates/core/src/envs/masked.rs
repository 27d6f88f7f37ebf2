use super::{apply_mask, ActionBounds, Environment, ObsMask, ObservationAttributeSpec, StepResult};
use crate::Result;

/// Drops the masked attribute segments from every observation of `inner`.
/// The wrapped environment still simulates its full state.
pub struct MaskedEnv<E> {
    inner: E,
    mask: ObsMask,
    full_spec: ObservationAttributeSpec,
    spec: ObservationAttributeSpec,
}

impl<E: Environment> MaskedEnv<E> {
    pub fn new(inner: E, mask: ObsMask) -> Result<Self> {
        let full_spec = inner.observation_spec().clone();
        let spec = full_spec.masked(&mask)?;
        Ok(Self {
            inner,
            mask,
            full_spec,
            spec,
        })
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }

    pub fn inner_mut(&mut self) -> &mut E {
        &mut self.inner
    }

    pub fn mask(&self) -> &ObsMask {
        &self.mask
    }
}

impl<E: Environment> Environment for MaskedEnv<E> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn observation_spec(&self) -> &ObservationAttributeSpec {
        &self.spec
    }

    fn action_bounds(&self) -> &ActionBounds {
        self.inner.action_bounds()
    }

    fn reset(&mut self, seed: u64) -> Result<Vec<f32>> {
        let obs = self.inner.reset(seed)?;
        apply_mask(&obs, &self.full_spec, &self.mask)
    }

    fn step(&mut self, action: &[f32]) -> Result<StepResult> {
        let mut result = self.inner.step(action)?;
        result.observation = apply_mask(&result.observation, &self.full_spec, &self.mask)?;
        Ok(result)
    }

    fn bodies(&self) -> Vec<String> {
        self.inner.bodies()
    }

    fn set_mass_scale(&mut self, body: &str, scale: f64) -> Result<()> {
        self.inner.set_mass_scale(body, scale)
    }
}
