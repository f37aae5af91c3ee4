use std::path::PathBuf;

use sne_core::error::{Clause, Inconsistency};
use sne_core::Error as CoreError;
use thiserror::Error;

/// Everything that stops a command early. Each variant maps to a fixed exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Usage(String),
    #[error("unsupported rule: {0}")]
    Unsupported(String),
    #[error("inconsistent state: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Core(CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Parse(_) | CliError::Usage(_) => 2,
            CliError::Unsupported(_) => 3,
            CliError::Inconsistent(_) => 4,
            CliError::Core(e) => match e {
                CoreError::UnsupportedRule(_) => 3,
                CoreError::Inconsistent(_) => 4,
                _ => 2,
            },
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::UnsupportedRule(what) => CliError::Unsupported(what.to_string()),
            CoreError::Inconsistent(x) => CliError::Inconsistent(inconsistency_text(&x)),
            other => CliError::Core(other),
        }
    }
}

/// Membership violation with 1-based indices.
pub fn inconsistency_text(x: &Inconsistency) -> String {
    let clause = match x.clause {
        Clause::NonTruthfulOutsider => "non-truthful vote outside the coalition".to_string(),
        Clause::ObservableChange { alt } => {
            format!(
                "observable transfer change at alternative {} outside the coalition",
                alt + 1
            )
        }
        Clause::StickyVoteChanged => "sticky outsider changed its vote".to_string(),
        Clause::UnfundedRedirect { alt } => {
            format!(
                "incoming payments withdrawn at alternative {} without a paying member",
                alt + 1
            )
        }
    };
    format!("agent {} violates membership: {clause}", x.agent + 1)
}
