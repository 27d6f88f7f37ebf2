//! TD3 with a parallel fixed-length history encoder for partially observable
//! continuous control.
//!
//! The crate is split along the pipeline:
//!
//! - [`nn`]: dense networks with exact gradients, Adam, polyak averaging and a
//!   central-difference gradient oracle.
//! - [`encoder`]: history windows and the encoders that turn them into a
//!   context vector (parallel per-step embedding, GRU baseline, passthrough).
//! - [`envs`]: attribute-tagged observations, masking, the built-in pendulum
//!   and point-mass environments, mass randomization and the remote bridge
//!   client.
//! - [`agent`]: replay storage with on-demand window assembly and the TD3
//!   update.
//! - [`harness`]: seeded runs, evaluation, metrics, mass-robustness tables and
//!   plots.

pub mod agent;
pub mod encoder;
pub mod envs;
mod error;
pub mod harness;
pub mod nn;

pub use error::{Error, Result};
