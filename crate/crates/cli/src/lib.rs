//! File formats, reports and subcommands behind the `sne` binary.

pub mod commands;
pub mod error;
pub mod files;
pub mod number;
pub mod report;

pub use commands::{
    cmd_construct, cmd_construct_loaded, cmd_devsearch, cmd_dynamics, cmd_rafilter, cmd_verify, DynamicsOptions,
    GridOptions, Outcome, Verbosity,
};
pub use error::CliError;
pub use files::{
    parse_json, parse_json_report, read_json, CandidatesFile, InstanceFile, RuleFile, StateFile, SCHEMA_VERSION,
};
pub use number::Number;
pub use report::Report;
