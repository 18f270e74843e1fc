//! Batch front end: run configuration, verification suites and CSV
//! reports.

pub mod cli;
pub mod commands;
pub mod config;
pub mod suites;

pub use cli::run;
pub use commands::{
    cmd_measure, cmd_operators, cmd_reconstruct, cmd_report, cmd_verify, prepare, EXIT_CONFIG,
    EXIT_FAILURE, EXIT_PASS,
};
pub use config::{
    parse_depths, parse_support, FileConfig, LoadedSystem, Overrides, RunConfig, Tolerances,
};
pub use suites::{is_config_error, run_all, run_suite, Check, SuiteReport, Tolerance, SUITES};
