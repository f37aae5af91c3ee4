//! Can a paid agent be squeezed without anyone else being forced to join?
//!
//! A receiver `i` (positive transfer at the winner `b`) exposes exploitable
//! slack in one of three ways:
//!
//! * strict slack: `U_i(b)` beats every rival outright;
//! * loose donors: `i` is paid at every next-best rival, and each of those
//!   rivals has a payer who strictly prefers `b`;
//! * a binding donor: `i` is paid at every next-best rival, and one payer is
//!   indifferent at every rival where all payers are indifferent.
//!
//! The last two are only examined when strict slack is absent, so the first
//! two flags are never set together. Whenever loose donors exist the binding
//! condition holds vacuously as well; the plan then uses the loose-donor
//! construction.

use std::fmt;

use crate::equilibrium::nba::{nba_report_unchecked, NbaReport};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{coverage_violation, Instance, TransferScheme};
use crate::rule::RuleSpec;
use crate::scalar::{min_of, Scalar};
use crate::state::State;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SlackCase {
    StrictSlack,
    LooseDonors,
    BindingDonor,
}

impl SlackCase {
    pub fn tag(self) -> &'static str {
        match self {
            SlackCase::StrictSlack => "strict-slack",
            SlackCase::LooseDonors => "loose-donors",
            SlackCase::BindingDonor => "binding-donor",
        }
    }
}

impl fmt::Display for SlackCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Roles and step size for a redistribution away from `receiver`.
#[derive(Clone, Debug, PartialEq)]
pub enum WitnessPlan<S> {
    /// `router` (a payer at the winner) keeps `amount` it used to pay `receiver`.
    StrictSlack { receiver: usize, router: usize, amount: S },
    /// Each `(x, j)` in `loose` stops paying `epsilon` to `receiver` at `x`;
    /// `router` keeps `epsilon / 2` at the winner.
    LooseDonors {
        receiver: usize,
        nba: Vec<usize>,
        loose: Vec<(usize, usize)>,
        router: usize,
        epsilon: S,
    },
    /// As above, but `absorber` withdraws at every binding rival and collects
    /// `epsilon / 2` at the winner, which `router` stops paying to `receiver`.
    BindingDonor {
        receiver: usize,
        nba: Vec<usize>,
        binding: Vec<usize>,
        absorber: usize,
        loose: Vec<(usize, usize)>,
        router: usize,
        epsilon: S,
    },
}

impl<S> WitnessPlan<S> {
    pub fn case(&self) -> SlackCase {
        match self {
            WitnessPlan::StrictSlack { .. } => SlackCase::StrictSlack,
            WitnessPlan::LooseDonors { .. } => SlackCase::LooseDonors,
            WitnessPlan::BindingDonor { .. } => SlackCase::BindingDonor,
        }
    }

    pub fn receiver(&self) -> usize {
        match self {
            WitnessPlan::StrictSlack { receiver, .. }
            | WitnessPlan::LooseDonors { receiver, .. }
            | WitnessPlan::BindingDonor { receiver, .. } => *receiver,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlackVerdict<S> {
    pub agent: usize,
    pub winner: usize,
    pub strict_slack: bool,
    pub loose_donors: bool,
    pub binding_donor: bool,
    pub plan: Option<WitnessPlan<S>>,
}

impl<S> SlackVerdict<S> {
    pub fn any(&self) -> bool {
        self.strict_slack || self.loose_donors || self.binding_donor
    }

    /// Lowest case that holds.
    pub fn case(&self) -> Option<SlackCase> {
        self.plan.as_ref().map(WitnessPlan::case)
    }
}

/// Evaluates the three conditions for receiver `agent` at the state's winner.
pub fn slack_conditions<S: Scalar>(
    instance: &Instance<S>,
    rule: &RuleSpec,
    state: &State<S>,
    agent: usize,
) -> Result<SlackVerdict<S>> {
    state.check_shape(instance, rule)?;
    instance.check_agent(agent)?;
    let b = state.winner(rule);
    if !state.tau.get(agent, b).is_positive() {
        return Err(Error::NotAReceiver { agent });
    }
    if !instance.is_welfare_maximizer(b) {
        return Err(Error::Precondition(format!("winner {b} does not maximize welfare")));
    }
    let u = state.utilities(instance);
    if let Some((i, _)) = coverage_violation(&u, b) {
        return Err(Error::NotCovered { alt: b, agent: i });
    }
    Ok(evaluate(&u, &state.tau, b, agent))
}

/// Core of [`slack_conditions`] without precondition checks.
pub(crate) fn evaluate<S: Scalar>(u: &Matrix<S>, tau: &TransferScheme<S>, b: usize, i: usize) -> SlackVerdict<S> {
    let row = u.row(i);
    let report = nba_report_unchecked(u, tau, b, i);
    let router = (0..u.rows())
        .find(|&j| tau.get(j, b).is_negative())
        .expect("a positive transfer at b is balanced by some payer");
    let rival = report.nba.first().map(|&x| row[x].clone());
    let mut verdict = SlackVerdict {
        agent: i,
        winner: b,
        strict_slack: false,
        loose_donors: false,
        binding_donor: false,
        plan: None,
    };

    let beta = rival.map(|r| row[b].clone() - r);
    if beta.as_ref().is_none_or(|beta| beta.is_positive()) {
        verdict.strict_slack = true;
        let amount = min_of(
            beta.into_iter()
                .chain([tau.get(i, b).clone(), tau.get(router, b).abs()]),
        )
        .expect("non-empty")
        .half();
        verdict.plan = Some(WitnessPlan::StrictSlack {
            receiver: i,
            router,
            amount,
        });
        return verdict;
    }

    if !report.nba.iter().all(|&x| tau.get(i, x).is_positive()) {
        return verdict;
    }
    verdict.loose_donors = report.nba.iter().all(|x| report.donor_sets[x].first_loose().is_some());
    let absorber = binding_absorber(&report);
    verdict.binding_donor = absorber.is_some();

    if verdict.loose_donors {
        let loose: Vec<(usize, usize)> = report
            .nba
            .iter()
            .map(|&x| (x, report.donor_sets[&x].first_loose().expect("checked above")))
            .collect();
        let epsilon = step(u, tau, b, i, &report.nba, &loose, None, router);
        verdict.plan = Some(WitnessPlan::LooseDonors {
            receiver: i,
            nba: report.nba.clone(),
            loose,
            router,
            epsilon,
        });
    } else if let Some(absorber) = absorber {
        let loose: Vec<(usize, usize)> = report
            .nba
            .iter()
            .filter(|x| !report.binding.contains(x))
            .map(|&x| {
                (
                    x,
                    report.donor_sets[&x]
                        .first_loose()
                        .expect("non-binding has a loose donor"),
                )
            })
            .collect();
        let router = if tau.get(absorber, b).is_negative() {
            absorber
        } else {
            router
        };
        let epsilon = step(
            u,
            tau,
            b,
            i,
            &report.nba,
            &loose,
            Some((absorber, &report.binding)),
            router,
        );
        verdict.plan = Some(WitnessPlan::BindingDonor {
            receiver: i,
            nba: report.nba.clone(),
            binding: report.binding.clone(),
            absorber,
            loose,
            router,
            epsilon,
        });
    }
    verdict
}

/// Lowest-index agent tight at every binding rival (any agent when none bind).
fn binding_absorber(report: &NbaReport) -> Option<usize> {
    let mut sets = report.binding.iter().map(|x| &report.donor_sets[x].tight);
    match sets.next() {
        None => Some(0),
        Some(first) => {
            let rest: Vec<_> = sets.collect();
            first.iter().copied().find(|j| rest.iter().all(|s| s.contains(j)))
        }
    }
}

/// Half the smallest margin that keeps every changed quantity on the same
/// side of zero and every ranking of the receiver intact.
#[allow(clippy::too_many_arguments)]
fn step<S: Scalar>(
    u: &Matrix<S>,
    tau: &TransferScheme<S>,
    b: usize,
    i: usize,
    nba: &[usize],
    loose: &[(usize, usize)],
    absorber: Option<(usize, &[usize])>,
    router: usize,
) -> S {
    let row = u.row(i);
    let mut bounds = Vec::new();
    for a in 0..row.len() {
        if a == b || nba.contains(&a) {
            bounds.push(tau.get(i, a).clone());
        } else {
            bounds.push(row[b].clone() - row[a].clone());
        }
    }
    for &(x, j) in loose {
        bounds.push(tau.get(j, x).abs());
        bounds.push(u[(j, b)].clone() - u[(j, x)].clone());
    }
    if let Some((j, binding)) = absorber {
        bounds.extend(binding.iter().map(|&x| tau.get(j, x).abs()));
    }
    bounds.push(tau.get(router, b).abs());
    min_of(bounds).expect("at least the receiver's own transfer").half()
}
