use serde::{Deserialize, Serialize};

use super::eval::EvalRecord;
use crate::{Error, Result};

/// Mean with a fixed summation order (ascending values), so the result does
/// not depend on the order of the input.
pub fn mean(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.iter().sum::<f64>() / sorted.len() as f64
}

/// Population standard deviation (divides by `n`).
pub fn population_std(values: &[f64]) -> f64 {
    let m = mean(values);
    let squares: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    mean(&squares).sqrt()
}

/// Mean of the mean returns of the records taken during the final quarter of
/// training, i.e. with `global_step >= 0.75 * total_steps` (inclusive).
pub fn last25_mean(records: &[EvalRecord], total_steps: u64) -> Result<f64> {
    let window: Vec<f64> = records
        .iter()
        .filter(|r| 4 * u128::from(r.global_step) >= 3 * u128::from(total_steps))
        .map(|r| r.mean_return)
        .collect();
    if window.is_empty() {
        return Err(Error::EmptyWindow(format!(
            "no evaluation record at or after step {} of {total_steps}",
            (3 * u128::from(total_steps)).div_ceil(4)
        )));
    }
    Ok(mean(&window))
}

/// Largest mean return over a seed's records.
pub fn max_reward(records: &[EvalRecord]) -> Result<f64> {
    records
        .iter()
        .map(|r| r.mean_return)
        .max_by(f64::total_cmp)
        .ok_or_else(|| Error::EmptyWindow("no evaluation records".into()))
}

/// Per-seed numbers behind a [`MetricsSummary`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedMetrics {
    pub seed: u64,
    pub max_reward: Option<f64>,
    pub last25_mean: Option<f64>,
    /// Why a value is missing (seed failure or empty window).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// "max reward / last-25% mean ± std" over seeds. Standard deviations are
/// population standard deviations across seeds. Seeds without a value are
/// left out of the cross-seed statistics and listed in `missing_seeds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub total_steps: u64,
    pub seeds: Vec<SeedMetrics>,
    pub max_reward_mean: Option<f64>,
    pub max_reward_std: Option<f64>,
    pub last25_mean: Option<f64>,
    pub last25_std: Option<f64>,
    pub missing_seeds: Vec<u64>,
}

fn cross_seed(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        (None, None)
    } else {
        (Some(mean(values)), Some(population_std(values)))
    }
}

/// Summarizes per-seed results. A seed given as `Err` (a failed run) keeps
/// its error message and counts as missing.
pub fn summarize_outcomes(per_seed: &[(u64, std::result::Result<Vec<EvalRecord>, String>)], total_steps: u64) -> MetricsSummary {
    let mut seeds = Vec::with_capacity(per_seed.len());
    let mut missing_seeds = Vec::new();
    for (seed, outcome) in per_seed {
        let metrics = match outcome {
            Ok(records) => {
                let max = max_reward(records);
                let last = last25_mean(records, total_steps);
                let error = last.as_ref().err().or(max.as_ref().err()).map(|e| e.to_string());
                SeedMetrics {
                    seed: *seed,
                    max_reward: max.ok(),
                    last25_mean: last.ok(),
                    error,
                }
            }
            Err(message) => SeedMetrics {
                seed: *seed,
                max_reward: None,
                last25_mean: None,
                error: Some(message.clone()),
            },
        };
        if metrics.last25_mean.is_none() {
            missing_seeds.push(*seed);
        }
        seeds.push(metrics);
    }
    let maxima: Vec<f64> = seeds.iter().filter_map(|s| s.max_reward).collect();
    let lasts: Vec<f64> = seeds.iter().filter_map(|s| s.last25_mean).collect();
    let (max_reward_mean, max_reward_std) = cross_seed(&maxima);
    let (last25_mean, last25_std) = cross_seed(&lasts);
    missing_seeds.sort_unstable();
    MetricsSummary {
        total_steps,
        seeds,
        max_reward_mean,
        max_reward_std,
        last25_mean,
        last25_std,
        missing_seeds,
    }
}

pub fn summarize(per_seed: &[(u64, Vec<EvalRecord>)], total_steps: u64) -> MetricsSummary {
    let outcomes: Vec<_> = per_seed.iter().map(|(s, r)| (*s, Ok(r.clone()))).collect();
    summarize_outcomes(&outcomes, total_steps)
}

impl MetricsSummary {
    /// `max / last25 ± std`, the layout used in result tables.
    pub fn table_entry(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.1}"));
        format!(
            "{} / {} ± {}",
            fmt(self.max_reward_mean),
            fmt(self.last25_mean),
            fmt(self.last25_std)
        )
    }
}
