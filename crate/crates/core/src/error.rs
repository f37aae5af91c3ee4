use std::fmt;

use thiserror::Error;

/// Structural problems with matrices, rankings and schemes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("an instance needs at least one agent and one alternative")]
    Empty,
    #[error("utility of agent {agent} for alternative {alt} is negative")]
    NegativeUtility { agent: usize, alt: usize },
    #[error("agent {agent} cannot promise a transfer to itself")]
    SelfPromise { agent: usize },
    #[error("promise from {from} to {to} at alternative {alt} is negative")]
    NegativePromise { from: usize, to: usize, alt: usize },
    #[error("transfers at alternative {alt} do not sum to zero")]
    Unbalanced { alt: usize },
    #[error("{what} index {index} out of range (limit {limit})")]
    OutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },
    #[error("ranking {0:?} is not a permutation")]
    NotAPermutation(Vec<usize>),
}

/// Which membership rule a state or deviation broke.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Clause {
    /// Agent outside the coalition does not vote truthfully.
    NonTruthfulOutsider,
    /// Agent outside the coalition has a transfer change that only it could
    /// have made (observable participation).
    ObservableChange { alt: usize },
    /// Agent outside the coalition changed its vote under sticky behavior.
    StickyVoteChanged,
    /// Outsiders lost incoming payments that no coalition payer could redirect.
    UnfundedRedirect { alt: usize },
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::NonTruthfulOutsider => f.write_str("non-truthful vote outside the coalition"),
            Clause::ObservableChange { alt } => {
                write!(
                    f,
                    "observable transfer change at alternative {alt} outside the coalition"
                )
            }
            Clause::StickyVoteChanged => f.write_str("sticky outsider changed its vote"),
            Clause::UnfundedRedirect { alt } => {
                write!(
                    f,
                    "incoming payments withdrawn at alternative {alt} without a paying member"
                )
            }
        }
    }
}

/// A state (or a deviation) that violates coalition membership rules.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("agent {agent} violates membership: {clause}")]
pub struct Inconsistency {
    pub agent: usize,
    pub clause: Clause,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Inconsistent(#[from] Inconsistency),
    #[error("alternative {alt} is not fully covered (agent {agent} prefers another)")]
    NotCovered { alt: usize, agent: usize },
    #[error("agent {agent} receives no positive transfer at the winner")]
    NotAReceiver { agent: usize },
    #[error("rule not supported here: {0}")]
    UnsupportedRule(&'static str),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("constructed witness was rejected: {0}")]
    WitnessRejected(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
