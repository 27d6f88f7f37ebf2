use std::path::Path;

use serde::{Deserialize, Serialize};

use super::eval::evaluate_policy;
use super::metrics::mean;
use crate::agent::Td3Bundle;
use crate::envs::Environment;
use crate::{Error, Result};

/// Evaluate with `body` at `scale` times its default mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassScenario {
    pub body: String,
    pub scale: f64,
}

/// Expands a scenario list such as `"0.5,1.5"` (every body at each scale) or
/// `"torso=0.5,*=1.5"` (`*` meaning every body) against `bodies`.
pub fn parse_scenarios(spec: &str, bodies: &[String]) -> Result<Vec<MassScenario>> {
    let mut scenarios = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (body, scale) = match item.split_once('=') {
            Some((body, scale)) => (body.trim(), scale.trim()),
            None => ("*", item),
        };
        let scale: f64 = scale
            .parse()
            .map_err(|_| Error::config(format!("bad mass scale {scale:?} in {item:?}")))?;
        if body == "*" {
            scenarios.extend(bodies.iter().map(|b| MassScenario {
                body: b.clone(),
                scale,
            }));
        } else if !bodies.iter().any(|b| b == body) {
            return Err(Error::config(format!("unknown body {body:?}; known bodies: {}", bodies.join(", "))));
        } else {
            scenarios.push(MassScenario {
                body: body.to_string(),
                scale,
            });
        }
    }
    if scenarios.is_empty() {
        return Err(Error::config(format!("no mass scenarios in {spec:?}")));
    }
    Ok(scenarios)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassEntry {
    pub body: String,
    pub scale: f64,
    pub mean_return: f64,
    pub episode_returns: Vec<f64>,
}

/// All scenarios of one body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassRow {
    pub body: String,
    /// `(scale, mean return)` per scenario, in evaluation order.
    pub scales: Vec<(f64, f64)>,
    /// Mean over every episode of every scenario of this body.
    pub mean_return: f64,
    pub episodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassTable {
    pub entries: Vec<MassEntry>,
}

impl MassTable {
    /// One row per body, in order of first appearance.
    pub fn rows(&self) -> Vec<MassRow> {
        let mut bodies: Vec<&str> = Vec::new();
        for e in &self.entries {
            if !bodies.contains(&e.body.as_str()) {
                bodies.push(&e.body);
            }
        }
        bodies
            .into_iter()
            .map(|body| {
                let entries: Vec<&MassEntry> = self.entries.iter().filter(|e| e.body == body).collect();
                let all: Vec<f64> = entries.iter().flat_map(|e| e.episode_returns.iter().copied()).collect();
                MassRow {
                    body: body.to_string(),
                    scales: entries.iter().map(|e| (e.scale, e.mean_return)).collect(),
                    mean_return: mean(&all),
                    episodes: all.len(),
                }
            })
            .collect()
    }

    /// `body, scenarios, episodes, mean_return` followed by one
    /// `scale_<s>` column per distinct scale.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut scales: Vec<f64> = Vec::new();
        for e in &self.entries {
            if !scales.contains(&e.scale) {
                scales.push(e.scale);
            }
        }
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut writer = csv::Writer::from_writer(file);
        let mut header = vec!["body".to_string(), "scenarios".into(), "episodes".into(), "mean_return".into()];
        header.extend(scales.iter().map(|s| format!("scale_{s}")));
        writer.write_record(&header)?;
        for row in self.rows() {
            let mut record = vec![
                row.body.clone(),
                row.scales.len().to_string(),
                row.episodes.to_string(),
                row.mean_return.to_string(),
            ];
            for s in &scales {
                let cell = row.scales.iter().find(|(scale, _)| scale == s).map(|(_, m)| m.to_string());
                record.push(cell.unwrap_or_default());
            }
            writer.write_record(&record)?;
        }
        writer.flush().map_err(|e| Error::io(path, e))
    }
}

/// Runs `episodes` evaluation episodes per scenario with that body's mass
/// scaled. Every body is returned to its default mass after its scenario.
pub fn evaluate_mass_robustness(
    env: &mut dyn Environment,
    bundle: &Td3Bundle<f32>,
    scenarios: &[MassScenario],
    episodes: usize,
    seed: u64,
) -> Result<MassTable> {
    let bodies = env.bodies();
    if let Some(bad) = scenarios.iter().find(|s| !bodies.contains(&s.body)) {
        return Err(Error::config(format!(
            "unknown body {:?}; {} has {bodies:?}",
            bad.body,
            env.id()
        )));
    }
    let mut entries = Vec::with_capacity(scenarios.len());
    for scenario in scenarios {
        env.set_mass_scale(&scenario.body, scenario.scale)?;
        let record = evaluate_policy(env, bundle, episodes, seed, 0);
        env.set_mass_scale(&scenario.body, 1.0)?;
        let record = record?;
        entries.push(MassEntry {
            body: scenario.body.clone(),
            scale: scenario.scale,
            mean_return: record.mean_return,
            episode_returns: record.episode_returns,
        });
    }
    Ok(MassTable { entries })
}
