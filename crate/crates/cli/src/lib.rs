//! Experiment driver for the entanglement walk: configuration, seeded
//! parallel trials and CSV output for each experiment.

// `!(x >= 0.0)` style tests are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod report;
pub mod tripartite;

pub use config::{EngineKind, Experiment, ExperimentConfig, Overrides, StepGrid};
pub use error::{CliError, Result};
pub use report::{run, run_with_workers, RunSummary};

/// Environment variable that sets the default worker count.
pub const WORKERS_ENV: &str = "ENTWALK_WORKERS";
