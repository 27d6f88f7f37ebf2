//! TD3 over history windows.

mod checkpoint;
mod config;
mod networks;
mod replay;
mod td3;

pub use checkpoint::{AgentCheckpoint, AGENT_FORMAT};
pub use config::Td3Config;
pub use networks::{ActorBatchTrace, ActorNetwork, ActorTrace, CriticBatchTrace, CriticNetwork, CriticTrace};
pub use replay::{Batch, ReplayBuffer, Transition};
pub use td3::{CriticTarget, Td3Bundle, UpdateDiagnostics, UpdateOutcome};
