//! Configuration, orchestration and reproducible output for the `emhd`
//! binary.

pub mod cli;
pub mod config;
pub mod io;
pub mod run;

pub use config::{validate_config, ExperimentConfig, ExperimentKind, Validation};
pub use run::{initial_field, run_experiment, RunOutcome};
