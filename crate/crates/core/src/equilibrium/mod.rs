//! Stability analysis for consensus states.

pub mod construct;
pub mod nba;
pub mod slack;
pub mod verify;

pub use construct::{construct, construct_ir_sne, welfare_order, Construction};
pub use nba::{nba_report, next_best, DonorSets, NbaReport};
pub use slack::{slack_conditions, SlackCase, SlackVerdict, WitnessPlan};
pub use verify::{grid_magnitude, maximizers_agree, verify_ir_sne, Reason, Verdict};
