use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::RunConfig;
use super::eval::{evaluate_policy, EvalRecord};
use super::logs::{self, SeedLog};
use super::metrics::{summarize_outcomes, MetricsSummary};
use crate::agent::{AgentCheckpoint, ReplayBuffer, Td3Bundle, Transition};
use crate::encoder::HistoryWindow;
use crate::envs::{randomize_masses, Environment, MassChange};
use crate::nn::checkpoint::write_json;
use crate::nn::derive_seed;
use crate::{Error, Result};

/// Streams of randomness derived from a run seed.
const AGENT_STREAM: u64 = 1;
const ACTION_STREAM: u64 = 2;
const RESET_STREAM: u64 = 3;
const MASS_STREAM: u64 = 4;
const EVAL_STREAM: u64 = 5;

/// Notifications emitted while a run progresses.
#[derive(Debug, Clone, PartialEq)]
pub enum Progress {
    SeedStarted { seed: u64 },
    Evaluated { seed: u64, record: EvalRecord },
    SeedFinished { seed: u64, error: Option<String> },
}

/// What one seed produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedOutcome {
    pub seed: u64,
    pub records: Vec<EvalRecord>,
    pub mass_changes: Vec<MassChange>,
    pub checkpoint: PathBuf,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub output_dir: PathBuf,
    pub summary: MetricsSummary,
    /// One entry per configured seed, in configuration order.
    pub seeds: Vec<(u64, Result<SeedOutcome>)>,
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    note: &'a str,
    config: &'a RunConfig,
    summary: &'a MetricsSummary,
}

fn is_artifact(name: &str) -> bool {
    matches!(name, "config.json" | "summary.json" | "summary.csv")
        || ["log-seed", "metrics-seed", "randomization-seed", "checkpoint-seed"]
            .iter()
            .any(|prefix| name.starts_with(prefix))
}

/// Creates `dir`, refusing to touch earlier run artifacts unless `force` is
/// set, in which case they are deleted.
pub fn prepare_output_dir(dir: &Path, force: bool) -> Result<()> {
    if dir.exists() {
        let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        let mut existing = Vec::new();
        for entry in entries {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            if path.file_name().and_then(|n| n.to_str()).is_some_and(is_artifact) {
                existing.push(path);
            }
        }
        if !existing.is_empty() {
            if !force {
                return Err(Error::OutputExists(dir.to_path_buf()));
            }
            for path in existing {
                std::fs::remove_file(&path).map_err(|e| Error::io(&path, e))?;
            }
        }
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn random_action<R: Rng + ?Sized>(low: &[f64], high: &[f64], rng: &mut R) -> Vec<f32> {
    low.iter()
        .zip(high)
        .map(|(l, h)| rng.random_range(*l..*h) as f32)
        .collect()
}

/// Trains one seed and writes its logs and checkpoint into `dir`.
pub fn train_seed(
    config: &RunConfig,
    seed: u64,
    dir: &Path,
    progress: &mut dyn FnMut(Progress),
) -> Result<SeedOutcome> {
    let td3 = config.resolved_td3();
    let started = Instant::now();
    let mut env = config.env.build()?;
    // Remote servers take one client at a time, so they evaluate on the
    // training connection; the interrupted training episode restarts.
    let mut eval_env = if config.env.is_builtin() {
        Some(config.env.build()?)
    } else {
        None
    };
    let obs_width = env.observation_width();
    let bounds = env.action_bounds().clone();
    let mut bundle =
        Td3Bundle::<f32>::new(obs_width, config.encoder.clone(), td3.clone(), bounds.clone(), derive_seed(seed, AGENT_STREAM))?;
    let window_length = bundle.window_length();
    let mut buffer = ReplayBuffer::new(td3.buffer_capacity, obs_width, bounds.width())?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, ACTION_STREAM));
    let mut mass_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, MASS_STREAM));
    let reset_base = derive_seed(seed, RESET_STREAM);
    let eval_seed = derive_seed(seed, EVAL_STREAM);

    let mut log = SeedLog::create(dir, seed)?;
    let mut records = Vec::new();
    let mut mass_changes = Vec::new();

    let mut episode_id = 0u64;
    let mut step_index = 0u64;
    let mut window = HistoryWindow::start(&env.reset(derive_seed(reset_base, episode_id))?, window_length)?;

    for global_step in 1..=config.total_steps {
        let action = if global_step <= td3.warmup_steps {
            random_action(&bounds.low, &bounds.high, &mut rng)
        } else {
            bundle.select_action(&window, true, &mut rng)?
        };
        let step = env.step(&action)?;
        buffer.push(Transition {
            observation: window.current().to_vec(),
            action,
            reward: step.reward as f32,
            next_observation: step.observation.clone(),
            terminated: step.terminated,
            truncated: step.truncated,
            episode_id,
            step_index,
        })?;
        if global_step > td3.warmup_steps {
            bundle.update_step(&buffer, &mut rng)?;
        }
        let mut restart = step.done();
        if !restart {
            window = window.shifted(&step.observation)?;
            step_index += 1;
        }

        if let Some(schedule) = &config.randomization {
            mass_changes.extend(randomize_masses(env.as_mut(), schedule, &mut mass_rng, global_step)?);
        }

        if global_step % config.eval_interval == 0 {
            let target: &mut dyn Environment = match eval_env.as_mut() {
                Some(e) => e.as_mut(),
                None => {
                    restart = true;
                    env.as_mut()
                }
            };
            let record = evaluate_policy(target, &bundle, config.eval_episodes, eval_seed, global_step)?;
            log.append(&record, started.elapsed().as_secs_f64())?;
            progress(Progress::Evaluated {
                seed,
                record: record.clone(),
            });
            records.push(record);
        }

        if restart {
            episode_id += 1;
            step_index = 0;
            window = HistoryWindow::start(&env.reset(derive_seed(reset_base, episode_id))?, window_length)?;
        }
    }

    if config.randomization.is_some() {
        logs::write_mass_changes(&logs::randomization_path(dir, seed), &mass_changes)?;
    }
    let checkpoint = logs::checkpoint_path(dir, seed);
    AgentCheckpoint::new(&bundle, Some(config.env.clone())).save(&checkpoint)?;
    Ok(SeedOutcome {
        seed,
        records,
        mass_changes,
        checkpoint,
    })
}

/// Runs every seed in order, then writes `summary.json` and `summary.csv`.
/// A failing seed is recorded in the summary and the remaining seeds still run.
pub fn run_training(config: &RunConfig, force: bool) -> Result<RunOutcome> {
    run_training_with(config, force, &mut |_| {})
}

pub fn run_training_with(config: &RunConfig, force: bool, progress: &mut dyn FnMut(Progress)) -> Result<RunOutcome> {
    config.validate()?;
    let dir = config.output_dir.clone();
    prepare_output_dir(&dir, force)?;
    let mut resolved = config.clone();
    resolved.td3 = Some(config.resolved_td3());
    write_json(&dir.join("config.json"), &resolved)?;

    let mut seeds = Vec::with_capacity(config.seeds.len());
    for &seed in &config.seeds {
        progress(Progress::SeedStarted { seed });
        let outcome = train_seed(&resolved, seed, &dir, progress);
        progress(Progress::SeedFinished {
            seed,
            error: outcome.as_ref().err().map(|e| e.to_string()),
        });
        seeds.push((seed, outcome));
    }

    let per_seed: Vec<_> = seeds
        .iter()
        .map(|(seed, outcome)| {
            let records = match outcome {
                Ok(o) => Ok(o.records.clone()),
                Err(e) => Err(format!("seed failed: {e}")),
            };
            (*seed, records)
        })
        .collect();
    let summary = summarize_outcomes(&per_seed, config.total_steps);
    write_summary(&dir, &resolved, &summary)?;
    Ok(RunOutcome {
        output_dir: dir,
        summary,
        seeds,
    })
}

fn write_summary(dir: &Path, config: &RunConfig, summary: &MetricsSummary) -> Result<()> {
    write_json(
        &dir.join("summary.json"),
        &SummaryFile {
            note: "max_reward_mean: cross-seed mean of per-seed maximum eval mean; \
                   last25: records with global_step >= 0.75 * total_steps; \
                   *_std: population standard deviation across seeds",
            config,
            summary,
        },
    )?;
    let path = dir.join("summary.csv");
    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    writer.write_record(["seed", "max_reward", "last25_mean", "error"])?;
    for s in &summary.seeds {
        writer.write_record([
            s.seed.to_string(),
            cell(s.max_reward),
            cell(s.last25_mean),
            s.error.clone().unwrap_or_default(),
        ])?;
    }
    writer.write_record(["mean".to_string(), cell(summary.max_reward_mean), cell(summary.last25_mean), String::new()])?;
    writer.write_record([
        "std_population".to_string(),
        cell(summary.max_reward_std),
        cell(summary.last25_std),
        String::new(),
    ])?;
    writer.flush().map_err(|e| Error::io(&path, e))
}
