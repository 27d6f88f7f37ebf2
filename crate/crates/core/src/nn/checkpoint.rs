//! Checkpoint encoding shared by every network in the crate.
//!
//! A checkpoint is a single JSON document. Float arrays are stored as base64
//! strings of little-endian IEEE-754 `f32` values, which keeps files compact
//! and round-trips single-precision parameters bit-exactly. A network record
//! looks like:
//!
//! ```json
//! {
//!   "format": "histenc-mlp/1",
//!   "spec": {"layer_widths": [4, 64, 1], "hidden_activation": "relu", "output_activation": "identity"},
//!   "params": "<base64 f32le>",
//!   "adam": {
//!     "config": {"learning_rate": 0.001, "beta1": 0.9, "beta2": 0.999, "epsilon": 1e-8},
//!     "first_moment": "<base64 f32le>",
//!     "second_moment": "<base64 f32le>",
//!     "step_count": 12
//!   },
//!   "update_count": 12
//! }
//! ```

use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{AdamConfig, AdamState, Mlp, MlpSpec};
use crate::{Error, Result};

pub fn encode_f32s(values: &[f32]) -> String {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    STANDARD.encode(bytes)
}

pub fn decode_f32s(text: &str) -> Result<Vec<f32>> {
    let bytes = STANDARD
        .decode(text)
        .map_err(|e| Error::contract(format!("invalid base64 float array: {e}")))?;
    if bytes.len() % 4 != 0 {
        return Err(Error::contract(format!(
            "float array byte length {} is not a multiple of 4",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

/// A `Vec<f32>` that serializes as a base64 little-endian string.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct F32Array(pub Vec<f32>);

impl Serialize for F32Array {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&encode_f32s(&self.0))
    }
}

impl<'de> Deserialize<'de> for F32Array {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        decode_f32s(&text)
            .map(F32Array)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamRecord {
    pub config: AdamConfig,
    pub first_moment: F32Array,
    pub second_moment: F32Array,
    pub step_count: u64,
}

impl From<&AdamState<f32>> for AdamRecord {
    fn from(state: &AdamState<f32>) -> Self {
        Self {
            config: state.config,
            first_moment: F32Array(state.first_moment.clone()),
            second_moment: F32Array(state.second_moment.clone()),
            step_count: state.step_count,
        }
    }
}

impl AdamRecord {
    pub fn into_state(self, param_count: usize) -> Result<AdamState<f32>> {
        if self.first_moment.0.len() != param_count || self.second_moment.0.len() != param_count {
            return Err(Error::contract(format!(
                "Adam record holds {}/{} moments for {param_count} parameters",
                self.first_moment.0.len(),
                self.second_moment.0.len()
            )));
        }
        Ok(AdamState {
            config: self.config,
            first_moment: self.first_moment.0,
            second_moment: self.second_moment.0,
            step_count: self.step_count,
        })
    }
}

pub const MLP_FORMAT: &str = "histenc-mlp/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpCheckpoint {
    pub format: String,
    pub spec: MlpSpec,
    pub params: F32Array,
    pub adam: Option<AdamRecord>,
    pub update_count: u64,
}

impl MlpCheckpoint {
    pub fn new(mlp: &Mlp<f32>, adam: Option<&AdamState<f32>>, update_count: u64) -> Self {
        Self {
            format: MLP_FORMAT.to_string(),
            spec: mlp.spec.clone(),
            params: F32Array(mlp.params.clone()),
            adam: adam.map(AdamRecord::from),
            update_count,
        }
    }

    /// Splits the checkpoint back into the network and optimizer state.
    pub fn restore(self) -> Result<(Mlp<f32>, Option<AdamState<f32>>, u64)> {
        if self.format != MLP_FORMAT {
            return Err(Error::contract(format!(
                "unsupported checkpoint format {:?}",
                self.format
            )));
        }
        let count = self.spec.param_count();
        let mlp = Mlp::from_params(self.spec, self.params.0)?;
        let adam = self.adam.map(|a| a.into_state(count)).transpose()?;
        Ok((mlp, adam, self.update_count))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
