//! Scenario runner and experiment drivers.

pub mod bots;
pub mod compare;
pub mod config;
pub mod fixtures;
pub mod metrics;
pub mod runner;
pub mod sweep;

pub use compare::{compare, CompareRow};
pub use config::ScenarioConfig;
pub use metrics::{MetricsRecord, Summary};
pub use runner::{run, RunOutput};
pub use sweep::{sweep, SweepParam, SweepRow};
