//! Constructing and searching for profitable coalitional deviations.

pub mod dynamics;
pub mod grand;
pub mod grid;
pub mod ra;
pub mod slack_witness;
pub mod witness;

pub use dynamics::{candidate_step, run_dynamics, DeviationSource, DynamicsConfig, DynamicsTrace, Terminal};
pub use grand::grand_coalition_deviation;
pub use grid::{grid_search, GridConfig, GridOutcome};
pub use ra::{construct_ra_deviation, ra_filter, ra_reports, reallocatable_amount, RaReport};
pub use slack_witness::construct_slack_witness;
pub use witness::{DeviationWitness, WitnessCase};
