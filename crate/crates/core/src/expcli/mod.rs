//! Experiment harness: JSON configs, sweep grids, replication and CSV output.

pub mod cli;
pub mod config;
pub mod output;
pub mod runner;

pub use config::{load_config, parse_config, ExperimentSpec};
pub use output::{SummaryRow, DAILY_HEADER, SUMMARY_HEADER};
pub use runner::{replicate_and_test, run_experiment, ExperimentReport, Metric, PairedComparison, RunOptions};
