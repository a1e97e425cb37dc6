//! Command-line pipeline around `sizeclust-core`: survey ingest, TOML run
//! configuration, and the `fit`, `sort`, `simulate` and `benchmark` runs
//! with their on-disk artifacts.

pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;

pub use config::{Overrides, RunConfig, RunMode};
pub use error::{CliError, CliResult};
pub use pipeline::{
    run_benchmark, run_fit, run_simulate, run_sort, ActionSummary, BenchmarkOutcome, BenchmarkRow, RunStatus,
    SortOutcome, VariantSummary,
};
