//! Exact engine for voting with outcome-contingent transfers: builds and
//! verifies individually rational strong Nash equilibria under the consensus
//! rule, and searches for coalitional deviations under top-only rules.
//!
//! Everything is generic over [`Scalar`]. Use the exact aliases
//! ([`Rational`], [`Rational64`]) whenever equality tests matter, which is
//! almost always; `f64` is supported for throughput experiments only.

pub mod deviation;
pub mod equilibrium;
pub mod error;
pub mod matrix;
pub mod model;
pub mod ranking;
pub mod rule;
pub mod scalar;
pub mod state;

pub use deviation::{
    candidate_step, construct_ra_deviation, construct_slack_witness, grand_coalition_deviation, grid_search, ra_filter,
    ra_reports, reallocatable_amount, run_dynamics, DeviationSource, DeviationWitness, DynamicsConfig, DynamicsTrace,
    GridConfig, GridOutcome, RaReport, Terminal, WitnessCase,
};
pub use equilibrium::{
    construct, construct_ir_sne, grid_magnitude, maximizers_agree, nba_report, slack_conditions, verify_ir_sne,
    Construction, NbaReport, Reason, SlackCase, SlackVerdict, Verdict, WitnessPlan,
};
pub use error::{Clause, Error, Inconsistency, ModelError, Result};
pub use matrix::Matrix;
pub use model::{
    coverage_violation, effective_utilities, full_coverage, observable_change, observable_participation,
    ContractMatrix, Instance, TransferScheme,
};
pub use ranking::{truthful_profile, truthful_top, Profile, Ranking};
pub use rule::{RuleKind, RuleSpec, VotingRule};
pub use scalar::{Exact, Scalar};
pub use state::{check_membership, is_ir_deviation, is_ir_feasible, State, VariantMode};

/// Arbitrary-precision rational; the default exact scalar.
pub type Rational = num_rational::BigRational;
/// Machine-word rational; faster, but may overflow on deep constructions.
pub type Rational64 = num_rational::Ratio<i64>;

pub type ExactInstance = Instance<Rational>;
pub type ExactScheme = TransferScheme<Rational>;
pub type ExactState = State<Rational>;
pub type FloatInstance = Instance<f64>;
