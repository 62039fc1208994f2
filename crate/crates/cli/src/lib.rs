//! Scenario runner for the stationary-light library: configuration,
//! named experiments and CSV emission.

pub mod config;
pub mod output;
pub mod scenario;

pub use config::{parse_config, Overrides, ScenarioConfig, ScenarioName};
pub use scenario::{run_scenario, RunArtifacts, RunError};
