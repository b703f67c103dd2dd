//! Config-driven experiment runner and table emitters.

mod config;
mod reproduce;
mod run;
mod tables;

pub use config::{parse_h, Analysis, ExperimentConfig, Problem, RhsMode, SolverKind};
pub use reproduce::{preset, reproduce, Overrides, ReproduceOutcome};
pub use run::{build_system, describe_failure, run_experiment, run_in_dir, RunOutcome, SizeRow};
pub use tables::{emit_table, render, TableId, TableOutput};

/// Process exit codes of the command-line front end.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const ERROR: i32 = 1;
    pub const VERIFY_FAILED: i32 = 2;
}
