use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Attribute, ObservationAttributeSpec, Segment};
use crate::nn::checkpoint::read_json;
use crate::{Error, Result};

/// Raw-index layout of a bridged environment's observation.
///
/// ```json
/// {
///   "env_id": "Humanoid-v4",
///   "raw_obs_dim": 376,
///   "attributes": {
///     "position":     {"ranges": [[0, 22]],                "expected_length": 22},
///     "velocity":     {"ranges": [[22, 45], [191, 269]],   "expected_length": 101},
///     "mass_inertia": {"ranges": [[55, 185]],              "expected_length": 130},
///     "force":        {"ranges": [[275, 292], [298, 376]], "expected_length": 95}
///   }
/// }
/// ```
///
/// Ranges are half-open `[start, end)` into the raw observation; the bridge
/// concatenates them per attribute in the canonical attribute order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentMap {
    pub env_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_obs_dim: Option<usize>,
    pub attributes: BTreeMap<Attribute, SegmentEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentEntry {
    pub ranges: Vec<[usize; 2]>,
    pub expected_length: usize,
}

impl SegmentEntry {
    pub fn range_length(&self) -> usize {
        self.ranges.iter().map(|[s, e]| e.saturating_sub(*s)).sum()
    }
}

impl SegmentMap {
    pub fn load(path: &Path) -> Result<Self> {
        let map: Self = read_json(path)?;
        map.validate()?;
        Ok(map)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.attributes.contains_key(&Attribute::Position) {
            return Err(Error::config("segment map must list the position attribute"));
        }
        let mut claimed: Vec<[usize; 2]> = Vec::new();
        for (attribute, entry) in &self.attributes {
            if entry.ranges.iter().any(|[s, e]| s >= e) {
                return Err(Error::config(format!("{attribute}: ranges must be non-empty [start, end)")));
            }
            if let Some(raw) = self.raw_obs_dim {
                if entry.ranges.iter().any(|[_, e]| *e > raw) {
                    return Err(Error::config(format!(
                        "{attribute}: range exceeds the raw observation width {raw}"
                    )));
                }
            }
            if entry.range_length() != entry.expected_length {
                return Err(Error::config(format!(
                    "{attribute}: ranges cover {} indices but {} are declared",
                    entry.range_length(),
                    entry.expected_length
                )));
            }
            for r in &entry.ranges {
                if claimed.iter().any(|c| r[0] < c[1] && c[0] < r[1]) {
                    return Err(Error::config(format!("{attribute}: range {r:?} overlaps another range")));
                }
                claimed.push(*r);
            }
        }
        Ok(())
    }

    /// The attribute layout the bridge reports, in canonical order.
    pub fn attribute_spec(&self) -> Result<ObservationAttributeSpec> {
        ObservationAttributeSpec::new(
            self.attributes
                .iter()
                .map(|(attribute, entry)| Segment {
                    attribute: *attribute,
                    length: entry.expected_length,
                })
                .collect(),
        )
    }
}
