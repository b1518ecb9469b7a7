//! Configuration, file formats, parallel execution and orchestration for
//! the `hybrid-pdem` command-line tool.

pub mod adapter;
pub mod config;
pub mod exec;
pub mod io;
pub mod problems;
pub mod run;

pub use config::{ConfigError, EngineKind, ExperimentConfig, ProblemKind};
pub use exec::RayonExecutor;
pub use run::{compare_runs, run_experiment, CheckKind, Comparison, Overrides, RunOutcome};
