//! Config-driven experiment runner: episode grids, oracle reports, ablations and fixtures.

pub mod ablation;
pub mod config;
pub mod dataset;
pub mod fixtures;
pub mod oracle_cmd;
pub mod runner;

pub use ablation::{run_ablation, AblationOptions, AblationReport};
pub use config::{load_config, parse_config, ConfigError, ExperimentConfig, Overrides};
pub use oracle_cmd::{oracle_report, OracleReport};
pub use runner::{run_experiment, run_experiment_in, Manifest, RunOptions, RunReport};
