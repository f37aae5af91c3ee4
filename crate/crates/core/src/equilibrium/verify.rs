//! Full stability check for consensus states, with a deviation attached
//! whenever the state turns out unstable.

use std::fmt;

use crate::deviation::grid::{grid_search, GridConfig};
use crate::deviation::{construct_slack_witness, grand_coalition_deviation, DeviationWitness};
use crate::equilibrium::slack::{evaluate, SlackCase};
use crate::error::{Error, Inconsistency, Result};
use crate::matrix::Matrix;
use crate::model::{coverage_violation, Instance};
use crate::rule::RuleSpec;
use crate::scalar::{max_of, Exact, Scalar};
use crate::state::{check_membership, is_ir_feasible, State, VariantMode};

/// Coverage failures have no direct construction; below these sizes the grid
/// falsifier looks for a deviation instead.
pub const COVERAGE_GRID_AGENTS: usize = 4;
pub const COVERAGE_GRID_ALTERNATIVES: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reason {
    /// Not reachable from the truthful state; names the first offending agent when there is one.
    IrInfeasible {
        agent: Option<usize>,
    },
    NotWelfareMaximizing,
    CoverageViolated {
        agent: usize,
        alt: usize,
    },
    SlackCondition {
        agent: usize,
        case: SlackCase,
    },
    StateInconsistent(Inconsistency),
    Stable,
}

impl Reason {
    pub fn tag(&self) -> &'static str {
        match self {
            Reason::IrInfeasible { .. } => "ir-infeasible",
            Reason::NotWelfareMaximizing => "not-welfare-maximizing",
            Reason::CoverageViolated { .. } => "coverage-violated",
            Reason::SlackCondition { .. } => "slack-condition",
            Reason::StateInconsistent(_) => "state-inconsistent",
            Reason::Stable => "stable",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::IrInfeasible { agent: Some(i) } => write!(f, "ir-infeasible (agent {i})"),
            Reason::CoverageViolated { agent, alt } => {
                write!(f, "coverage-violated (agent {agent} prefers {alt})")
            }
            Reason::SlackCondition { agent, case } => write!(f, "slack-condition (agent {agent}, {case})"),
            Reason::StateInconsistent(x) => write!(f, "state-inconsistent ({x})"),
            other => f.write_str(other.tag()),
        }
    }
}

/// Unstable verdicts carry a witness, except for infeasible or inconsistent
/// states and coverage failures the grid fallback could not exploit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict<S> {
    pub stable: bool,
    pub reason: Reason,
    pub witness: Option<DeviationWitness<S>>,
}

impl<S> Verdict<S> {
    fn stable() -> Self {
        Verdict {
            stable: true,
            reason: Reason::Stable,
            witness: None,
        }
    }

    fn unstable(reason: Reason, witness: Option<DeviationWitness<S>>) -> Self {
        Verdict {
            stable: false,
            reason,
            witness,
        }
    }
}

pub fn verify_ir_sne<S: Exact>(instance: &Instance<S>, rule: &RuleSpec, state: &State<S>) -> Result<Verdict<S>> {
    if !rule.is_consensus() {
        return Err(Error::UnsupportedRule("stability can only be verified under consensus"));
    }
    state.check_shape(instance, rule)?;
    match state.validate(instance, rule) {
        Ok(()) => {}
        Err(Error::Inconsistent(x)) => return Ok(Verdict::unstable(Reason::StateInconsistent(x), None)),
        Err(e) => return Err(e),
    }
    let b = state.winner(rule);
    let origin = State::truthful(instance, rule);
    let is_origin = state.tau.is_null() && state.profile == origin.profile;

    if !is_origin && !is_ir_feasible(instance, rule, state)? {
        let agent = ir_blocker(instance, rule, &origin, state);
        return Ok(Verdict::unstable(Reason::IrInfeasible { agent }, None));
    }
    if !instance.is_welfare_maximizer(b) {
        let w = grand_coalition_deviation(instance, rule, state)?;
        return Ok(Verdict::unstable(Reason::NotWelfareMaximizing, Some(w)));
    }
    if is_origin {
        // Sincere voting electing a maximizer admits no profitable deviation.
        return Ok(Verdict::stable());
    }

    let u = state.utilities(instance);
    if let Some((agent, alt)) = coverage_violation(&u, b) {
        let witness =
            if instance.agents() <= COVERAGE_GRID_AGENTS && instance.alternatives() <= COVERAGE_GRID_ALTERNATIVES {
                let magnitude = grid_magnitude(instance);
                let config = GridConfig::new(2, magnitude, instance.agents());
                grid_search(instance, rule, state, &config)?.witness().cloned()
            } else {
                None
            };
        return Ok(Verdict::unstable(Reason::CoverageViolated { agent, alt }, witness));
    }

    for i in (0..instance.agents()).filter(|&i| state.tau.get(i, b).is_positive()) {
        let verdict = evaluate(&u, &state.tau, b, i);
        if let Some(case) = verdict.case() {
            let w = construct_slack_witness(instance, rule, state, &verdict)?;
            return Ok(Verdict::unstable(Reason::SlackCondition { agent: i, case }, Some(w)));
        }
    }
    Ok(Verdict::stable())
}

/// Twice the largest utility, rounded up and at least one.
pub fn grid_magnitude<S: Exact>(instance: &Instance<S>) -> u32 {
    use num_traits::ToPrimitive;
    let top = max_of(instance.utilities().iter_rows().flatten().cloned()).unwrap_or_else(S::zero);
    let top = top.to_big().ceil().to_integer().to_u32().unwrap_or(u32::MAX / 4);
    top.saturating_mul(2).max(1)
}

/// Whether every agent values `b` exactly as much as each welfare maximizer.
/// Holds automatically once `b` is covered and maximizes welfare.
pub fn maximizers_agree<S: Scalar>(instance: &Instance<S>, u: &Matrix<S>, b: usize) -> bool {
    instance
        .welfare_maximizers()
        .into_iter()
        .all(|x| (0..u.rows()).all(|i| u[(i, x)] == u[(i, b)]))
}

fn ir_blocker<S: Scalar>(
    instance: &Instance<S>,
    rule: &RuleSpec,
    origin: &State<S>,
    state: &State<S>,
) -> Option<usize> {
    if let Err(Error::Inconsistent(x)) = check_membership(instance, rule, origin, state, VariantMode::Standard) {
        return Some(x.agent);
    }
    let (w0, w) = (origin.winner(rule), state.winner(rule));
    let u = state.utilities(instance);
    state
        .coalition
        .iter()
        .copied()
        .find(|&i| u[(i, w)] < *instance.utility(i, w0))
}
