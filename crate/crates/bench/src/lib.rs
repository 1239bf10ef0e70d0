//! Experiment harness for `subzero-core`: JSON configs, seeded runs and
//! sweeps with bound verification, and CSV/JSON trace output.
//!
//! Exit status contract of the CLI: 0 when every bound holds, 2 on a bound
//! violation, 1 on configuration or runtime errors.

pub mod config;
pub mod error;
pub mod runner;
pub mod trace;

pub use config::{ConfigError, Experiment, ExperimentConfig, Format, SolverName, SweepConfig};
pub use error::BenchError;
pub use runner::{run_experiment, run_one, sweep, RunOutcome, RunReport, SweepResult};

/// Bounds held.
pub const EXIT_OK: i32 = 0;
/// Configuration or runtime error.
pub const EXIT_ERROR: i32 = 1;
/// A bound check failed.
pub const EXIT_VIOLATION: i32 = 2;
