//! Scenario runs, parameter sweeps and Alg. 1 bracket traces, written as CSV.

pub mod commands;
mod error;
pub mod sweep;

pub use commands::{cmd_run, cmd_sweep, cmd_trace, load_config, Overrides};
pub use error::CliError;
pub use sweep::{Axis, SweepSpec};
