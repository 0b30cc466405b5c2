//! Command-line orchestration: job configs, the five pipelines and their
//! JSON/CSV output.

pub mod config;
pub mod emit;
pub mod run;

pub use config::{Command, Format, JobConfig, LpExponent, Span};
pub use emit::{emit, Report, Table};
pub use run::{execute, exit_code, run};
