//! Configured experiments: parsing, execution and file output.
//!
//! The `cmd_*` functions back the command-line subcommands. Each one takes
//! a validated [`ExperimentConfig`] and an output directory, writes its
//! files there, and returns what it wrote so callers can inspect the
//! results without re-reading them.

mod commands;
pub mod config;
pub mod output;
pub mod svg;

pub use commands::{
    catalog_listing, cmd_figure_bg, cmd_lyapunov, cmd_rates, cmd_run, cmd_stability, execute, figure_methods,
    initial_state, FigureOutcome, RunOutcome, FIGURE_METHODS,
};
pub use config::{apply_override, parse_config, parse_config_value, Budget, ExperimentConfig, MethodSpec, Mode, Outputs};
