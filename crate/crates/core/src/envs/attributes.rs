use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Semantic category of an observation component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    Position,
    Velocity,
    MassInertia,
    Force,
}

impl Attribute {
    pub const ALL: [Attribute; 4] = [
        Attribute::Position,
        Attribute::Velocity,
        Attribute::MassInertia,
        Attribute::Force,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Attribute::Position => "position",
            Attribute::Velocity => "velocity",
            Attribute::MassInertia => "mass_inertia",
            Attribute::Force => "force",
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Attribute {
    type Err = Error;

    /// Accepts full names and the one-letter codes `p`, `v`, `m`, `f`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "p" | "position" => Ok(Attribute::Position),
            "v" | "velocity" => Ok(Attribute::Velocity),
            "m" | "mass" | "mass_inertia" | "mass-inertia" => Ok(Attribute::MassInertia),
            "f" | "force" => Ok(Attribute::Force),
            other => Err(Error::config(format!("unknown observation attribute {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub attribute: Attribute,
    pub length: usize,
}

/// Ordered, contiguous attribute segments of a flat observation vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Segment>", into = "Vec<Segment>")]
pub struct ObservationAttributeSpec {
    segments: Vec<Segment>,
}

impl TryFrom<Vec<Segment>> for ObservationAttributeSpec {
    type Error = Error;

    fn try_from(segments: Vec<Segment>) -> Result<Self> {
        Self::new(segments)
    }
}

impl From<ObservationAttributeSpec> for Vec<Segment> {
    fn from(spec: ObservationAttributeSpec) -> Self {
        spec.segments
    }
}

impl ObservationAttributeSpec {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::config("an observation spec needs at least one segment"));
        }
        if let Some(s) = segments.iter().find(|s| s.length == 0) {
            return Err(Error::config(format!("segment {} has zero length", s.attribute)));
        }
        Ok(Self { segments })
    }

    /// One segment per attribute, in canonical order.
    pub fn from_lengths(position: usize, velocity: usize, mass_inertia: usize, force: usize) -> Result<Self> {
        Self::new(
            Attribute::ALL
                .iter()
                .zip([position, velocity, mass_inertia, force])
                .map(|(&attribute, length)| Segment { attribute, length })
                .collect(),
        )
    }

    /// The 348-dimensional humanoid decomposition: 22 position, 101 velocity,
    /// 130 mass/inertia and 95 force components.
    pub fn humanoid() -> Self {
        Self::from_lengths(22, 101, 130, 95).expect("constant lengths are valid")
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_dim(&self) -> usize {
        self.segments.iter().map(|s| s.length).sum()
    }

    /// Index ranges of each segment within the flat vector.
    pub fn ranges(&self) -> impl Iterator<Item = (Attribute, Range<usize>)> + '_ {
        self.segments.iter().scan(0usize, |start, s| {
            let range = *start..*start + s.length;
            *start += s.length;
            Some((s.attribute, range))
        })
    }

    pub fn length_of(&self, attribute: Attribute) -> usize {
        self.segments
            .iter()
            .filter(|s| s.attribute == attribute)
            .map(|s| s.length)
            .sum()
    }

    /// The spec of the observation left after `mask` is applied.
    pub fn masked(&self, mask: &ObsMask) -> Result<Self> {
        Self::new(
            self.segments
                .iter()
                .copied()
                .filter(|s| !mask.removes(s.attribute))
                .collect(),
        )
    }
}

/// Attributes removed from the observation. Position is always retained.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Attribute>", into = "Vec<Attribute>")]
pub struct ObsMask {
    removed: BTreeSet<Attribute>,
}

impl TryFrom<Vec<Attribute>> for ObsMask {
    type Error = Error;

    fn try_from(removed: Vec<Attribute>) -> Result<Self> {
        Self::new(removed)
    }
}

impl From<ObsMask> for Vec<Attribute> {
    fn from(mask: ObsMask) -> Self {
        mask.removed.into_iter().collect()
    }
}

impl ObsMask {
    pub fn new(removed: impl IntoIterator<Item = Attribute>) -> Result<Self> {
        let removed: BTreeSet<_> = removed.into_iter().collect();
        if removed.contains(&Attribute::Position) {
            return Err(Error::config("position can never be removed from the observation"));
        }
        Ok(Self { removed })
    }

    pub fn none() -> Self {
        Self::default()
    }

    pub fn removes(&self, attribute: Attribute) -> bool {
        self.removed.contains(&attribute)
    }

    pub fn removed(&self) -> impl Iterator<Item = Attribute> + '_ {
        self.removed.iter().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.removed.is_empty()
    }

    /// The short label used in tables, e.g. `VM` for velocity + mass/inertia.
    pub fn label(&self) -> String {
        if self.removed.is_empty() {
            return "full".to_string();
        }
        self.removed
            .iter()
            .map(|a| match a {
                Attribute::Position => 'P',
                Attribute::Velocity => 'V',
                Attribute::MassInertia => 'M',
                Attribute::Force => 'F',
            })
            .collect()
    }
}

impl FromStr for ObsMask {
    type Err = Error;

    /// Parses `"v,m"`, `"velocity,force"`, `"vm"`, or `""`/`"none"` for no mask.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s.eq_ignore_ascii_case("none") {
            return Ok(Self::none());
        }
        let parts: Vec<&str> = if s.contains(',') {
            s.split(',').collect()
        } else if s.chars().all(|c| "pvmfPVMF".contains(c)) {
            s.split("").filter(|p| !p.is_empty()).collect()
        } else {
            vec![s]
        };
        Self::new(parts.into_iter().map(str::parse).collect::<Result<Vec<_>>>()?)
    }
}

/// Width of the observation left after removing the masked segments.
pub fn masked_dim(spec: &ObservationAttributeSpec, mask: &ObsMask) -> usize {
    spec.segments
        .iter()
        .filter(|s| !mask.removes(s.attribute))
        .map(|s| s.length)
        .sum()
}

/// Keeps the retained segments of `observation`, in their original order.
pub fn apply_mask<T: Copy>(observation: &[T], spec: &ObservationAttributeSpec, mask: &ObsMask) -> Result<Vec<T>> {
    if observation.len() != spec.total_dim() {
        return Err(Error::contract(format!(
            "observation has width {}, attribute spec declares {}",
            observation.len(),
            spec.total_dim()
        )));
    }
    let mut out = Vec::with_capacity(masked_dim(spec, mask));
    for (attribute, range) in spec.ranges() {
        if !mask.removes(attribute) {
            out.extend_from_slice(&observation[range]);
        }
    }
    Ok(out)
}
