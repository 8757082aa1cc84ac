//! Measurement-pipeline experiments for the SMTJ delay-cell simulator: the
//! current-step trial chain, current sweeps, sampler demos, drift runs, and
//! the `smtj` command line.

pub mod cli;
pub mod config;
pub mod output;
pub mod pipeline;
pub mod runs;

pub use cli::cli_dispatch;
pub use config::ExperimentConfig;
pub use pipeline::{run_pdc_trial, TrialRecord};
