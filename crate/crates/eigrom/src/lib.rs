//! Experiment runner, file formats and command-line front end for
//! [`eigrom_core`].

pub mod config;
pub mod meshio;
pub mod mtx;
pub mod presets;
pub mod report;
pub mod runner;

pub use config::ExperimentConfig;
pub use report::{emit_outputs, ExperimentReport};
pub use runner::run_experiment;
