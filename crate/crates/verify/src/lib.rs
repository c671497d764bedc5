//! Scenario runner for the tmotive library: JSON configs in, deterministic
//! reports out. Verification tasks are trait objects registered by name.

pub mod config;
pub mod registry;
pub mod report;
pub mod runner;
pub mod tasks;

pub use config::{ConfigError, ConfigFile, ScenarioConfig};
pub use registry::{Context, Registry, VerificationTask};
pub use report::{BatchReport, Check, ScenarioReport, Status, TaskReport};
pub use runner::{run_batch, run_scenario, RunOptions};
