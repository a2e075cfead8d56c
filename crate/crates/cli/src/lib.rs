//! Experiment harness: configuration parsing, seeded run matrices with
//! per-run trace CSVs, and median summaries.

pub mod config;
pub mod error;
pub mod experiment;
pub mod summary;

pub use config::{parse_config, ExperimentConfig, Scheme};
pub use error::CliError;
pub use experiment::run_experiment;
pub use summary::{summarize, summarize_dir, Summary};
