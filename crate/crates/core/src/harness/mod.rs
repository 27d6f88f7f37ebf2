//! Experiment protocol: seeded training runs with periodic evaluation,
//! the summary metrics, the mass-variation study and plots.

mod config;
mod eval;
pub mod logs;
mod mass;
mod metrics;
mod plot;
mod runner;

pub use config::RunConfig;
pub use eval::{evaluate_policy, run_episode, EvalRecord};
pub use mass::{evaluate_mass_robustness, parse_scenarios, MassEntry, MassRow, MassScenario, MassTable};
pub use metrics::{last25_mean, max_reward, mean, population_std, summarize, summarize_outcomes, MetricsSummary, SeedMetrics};
pub use plot::{draw_curves, emit_plots, read_curve_csv, seed_curve, write_curve_csv, Curve, CurvePoint, PlotArtifacts, CURVE_HEADER};
pub use runner::{prepare_output_dir, run_training, run_training_with, train_seed, Progress, RunOutcome, SeedOutcome};
