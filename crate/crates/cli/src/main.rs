use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use histenc_td3::agent::{AgentCheckpoint, Td3Bundle};
use histenc_td3::envs::{masked_dim, EnvSpec, ObsMask};
use histenc_td3::harness::{
    emit_plots, evaluate_mass_robustness, evaluate_policy, parse_scenarios, run_training_with, Progress, RunConfig,
};

/// TD3 with history-window encoders for partially observable control.
#[derive(Parser)]
#[command(name = "histenc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every seed of a run configuration.
    Train {
        /// JSON run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Train only this seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override total_steps.
        #[arg(long)]
        steps: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace artifacts of an earlier run in the output directory.
        #[arg(long)]
        force: bool,
    },
    /// Evaluate a checkpoint with deterministic actions.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[command(flatten)]
        env: EnvArgs,
        #[arg(long, default_value_t = 10)]
        episodes: usize,
        /// Seed for the evaluation resets.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate a checkpoint with body masses scaled.
    MassEval {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Scenarios: "0.5,1.5" applies each scale to every body;
        /// "torso=0.5,*=1.5" names bodies explicitly.
        #[arg(long, default_value = "0.5,1.5")]
        scales: String,
        #[command(flatten)]
        env: EnvArgs,
        #[arg(long, default_value_t = 10)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the per-body table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Plot seed-averaged return curves of one or more runs.
    Plot {
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the observation width left after masking.
    MaskInfo {
        #[arg(long)]
        env: String,
        /// Attributes to remove, e.g. "v", "v,m" or "vf".
        #[arg(long, default_value = "")]
        mask: String,
        #[arg(long)]
        segment_map: Option<PathBuf>,
    },
}

/// Environment selection; defaults to the one stored in the checkpoint.
#[derive(Args)]
struct EnvArgs {
    #[arg(long)]
    env: Option<String>,
    /// Attributes to remove, e.g. "v", "v,m" or "vf".
    #[arg(long)]
    mask: Option<String>,
    /// Bridge server address for remote environments.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    segment_map: Option<PathBuf>,
}

impl EnvArgs {
    fn resolve(&self, stored: Option<&EnvSpec>) -> Result<EnvSpec> {
        let mut spec = match (&self.env, stored) {
            (Some(id), _) => EnvSpec::builtin(id, ObsMask::none()),
            (None, Some(stored)) => stored.clone(),
            (None, None) => bail!("the checkpoint does not name its environment; pass --env"),
        };
        if let Some(mask) = &self.mask {
            spec.mask = mask.parse()?;
        } else if self.env.is_some() {
            if let Some(stored) = stored.filter(|s| s.id == spec.id) {
                spec.mask = stored.mask.clone();
            }
        }
        if self.endpoint.is_some() {
            spec.endpoint = self.endpoint.clone();
        }
        if self.segment_map.is_some() {
            spec.segment_map = self.segment_map.clone();
        }
        Ok(spec)
    }
}

fn load_agent(path: &PathBuf) -> Result<(Td3Bundle<f32>, Option<EnvSpec>)> {
    let checkpoint = AgentCheckpoint::load(path).with_context(|| format!("loading {}", path.display()))?;
    let env = checkpoint.env.clone();
    Ok((checkpoint.restore()?, env))
}

fn fmt_returns(returns: &[f64]) -> String {
    returns.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(" ")
}

fn train(config: PathBuf, seed: Option<u64>, steps: Option<u64>, out: Option<PathBuf>, force: bool) -> Result<()> {
    let mut config = RunConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
    if let Some(seed) = seed {
        config.seeds = vec![seed];
    }
    if let Some(steps) = steps {
        config.total_steps = steps;
    }
    if let Some(out) = out {
        config.output_dir = out;
    }
    let outcome = run_training_with(&config, force, &mut |event| match event {
        Progress::SeedStarted { seed } => eprintln!("seed {seed}: training"),
        Progress::Evaluated { seed, record } => {
            eprintln!("seed {seed}: step {} mean return {:.2}", record.global_step, record.mean_return)
        }
        Progress::SeedFinished { seed, error: Some(e) } => eprintln!("seed {seed}: FAILED: {e}"),
        Progress::SeedFinished { seed, error: None } => eprintln!("seed {seed}: done"),
    })?;
    let summary = &outcome.summary;
    println!("output: {}", outcome.output_dir.display());
    println!("max / last-25% mean ± std: {}", summary.table_entry());
    if !summary.missing_seeds.is_empty() {
        println!("missing seeds: {:?}", summary.missing_seeds);
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Train {
            config,
            seed,
            steps,
            out,
            force,
        } => train(config, seed, steps, out, force),
        Command::Eval {
            checkpoint,
            env,
            episodes,
            seed,
        } => {
            let (bundle, stored) = load_agent(&checkpoint)?;
            let spec = env.resolve(stored.as_ref())?;
            let mut env = spec.build()?;
            if env.observation_width() != bundle.obs_width() {
                bail!(
                    "{} with mask {} gives observations of width {}, the agent expects {}",
                    spec.id,
                    spec.mask.label(),
                    env.observation_width(),
                    bundle.obs_width()
                );
            }
            let record = evaluate_policy(env.as_mut(), &bundle, episodes, seed, bundle.update_count)?;
            println!("mean return: {}", record.mean_return);
            println!("episode returns: {}", fmt_returns(&record.episode_returns));
            Ok(())
        }
        Command::MassEval {
            checkpoint,
            scales,
            env,
            episodes,
            seed,
            csv,
        } => {
            let (bundle, stored) = load_agent(&checkpoint)?;
            let spec = env.resolve(stored.as_ref())?;
            let mut env = spec.build()?;
            let scenarios = parse_scenarios(&scales, &env.bodies())?;
            let table = evaluate_mass_robustness(env.as_mut(), &bundle, &scenarios, episodes, seed)?;
            println!("body\tepisodes\tmean\tper-scale means");
            for row in table.rows() {
                let per_scale: Vec<String> = row.scales.iter().map(|(s, m)| format!("x{s}: {m:.2}")).collect();
                println!("{}\t{}\t{:.2}\t{}", row.body, row.episodes, row.mean_return, per_scale.join(", "));
            }
            if let Some(path) = csv {
                table.write_csv(&path)?;
            }
            Ok(())
        }
        Command::Plot { runs, out } => {
            let artifacts = emit_plots(&runs, &out)?;
            for file in artifacts.files {
                println!("{}", file.display());
            }
            Ok(())
        }
        Command::MaskInfo { env, mask, segment_map } => {
            let mut spec = EnvSpec::builtin(&env, mask.parse()?);
            spec.segment_map = segment_map;
            let full = spec.full_attribute_spec()?;
            for (attribute, range) in full.ranges() {
                let state = if spec.mask.removes(attribute) { "removed" } else { "kept" };
                println!("{:<13}{:>5}  {state}", attribute.name(), range.len());
            }
            println!("full dim: {}", full.total_dim());
            println!("masked dim: {}", masked_dim(&full, &spec.mask));
            Ok(())
        }
    }
}
