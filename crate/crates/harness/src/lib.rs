//! Experiment runner: configuration files, seeded trials, statistics,
//! parallel-run accounting and CSV/JSON export.

pub mod config;
pub mod error;
pub mod experiment;
pub mod export;
pub mod runs;
pub mod stats;

pub use config::{Budget, ExperimentConfig};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, run_experiment_on, ExperimentReport, TrialRecord, TrialStatus};
pub use export::{export, load_report};
pub use runs::{parallel_runs, parse_processor_list, runs_curve, Processors};
pub use stats::{trial_stats, TrialStats};
