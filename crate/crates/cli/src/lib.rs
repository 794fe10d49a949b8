//! Command implementations behind the `tagal` binary.
//!
//! Every command takes a resolved [`ExperimentConfig`]; the binary only
//! parses flags, merges them into the config and prints results.

pub mod commands;
pub mod config;

pub use commands::{cmd_baseline, cmd_e2e, cmd_evaluate, cmd_generate, cmd_profile};
pub use config::ExperimentConfig;
