//! Config-driven experiments, the acceptance suite and their artifacts.

pub mod config;
pub mod run;
pub mod suite;

pub use config::{Experiment, ExperimentConfig, DEFAULT_SEED};
pub use run::{
    csv_columns_markdown, run, run_config, Criterion, ExperimentResult, Table, CSV_COLUMNS, VERSION,
};
pub use suite::{run_suite, suite_configs, Profile, SuiteReport};
