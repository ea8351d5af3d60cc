//! Multi-trial experiments: config files, parallel trials, aggregation and
//! CSV/SVG output, plus the command-line front end.

mod cli;
pub mod config;
pub mod output;
mod suite;

pub use cli::cli_main;
pub use config::{DomainConfig, ExperimentConfig, FunctionSource};
pub use output::{emit_csv, emit_svg, render_svg, write_rounds_csv, write_summary_csv, write_traces_csv};
pub use suite::{aggregate, run_suite, run_suite_on, AggregateCurve, SuiteProblem, SuiteResults, TrialResult};
