//! States `(P, τ, S)`, membership validation and IR deviations.

use std::collections::BTreeSet;

use crate::error::{Clause, Error, Inconsistency, ModelError, Result};
use crate::matrix::Matrix;
use crate::model::{effective_utilities, observable_change, Instance, TransferScheme};
use crate::ranking::{truthful_profile, Profile, Ranking};
use crate::rule::RuleSpec;
use crate::scalar::Scalar;

/// How non-members behave when a coalition deviates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum VariantMode {
    /// Outsiders vote truthfully; only payments made by members can be withdrawn.
    #[default]
    Standard,
    /// Outsiders keep their previous votes.
    Sticky,
    /// Recipients cannot tell who pays them, so any payment into an outsider
    /// may be withdrawn.
    Anonymous,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct State<S> {
    pub profile: Profile,
    pub tau: TransferScheme<S>,
    pub coalition: BTreeSet<usize>,
}

impl<S: Scalar> State<S> {
    pub fn new(profile: Profile, tau: TransferScheme<S>, coalition: BTreeSet<usize>) -> Self {
        State {
            profile,
            tau,
            coalition,
        }
    }

    /// Everyone votes sincerely, no contracts, nobody participates.
    pub fn truthful(instance: &Instance<S>, rule: &RuleSpec) -> Self {
        State {
            profile: truthful_profile(instance.utilities(), rule.tiebreak()),
            tau: TransferScheme::zero(instance.agents(), instance.alternatives()),
            coalition: BTreeSet::new(),
        }
    }

    pub fn winner(&self, rule: &RuleSpec) -> usize {
        rule.apply(&self.profile)
    }

    pub fn utilities(&self, instance: &Instance<S>) -> Matrix<S> {
        effective_utilities(instance, &self.tau).expect("shape checked on validation")
    }

    pub fn is_member(&self, agent: usize) -> bool {
        self.coalition.contains(&agent)
    }

    /// Shapes and index ranges only.
    pub fn check_shape(&self, instance: &Instance<S>, rule: &RuleSpec) -> Result<(), ModelError> {
        let (n, m) = (instance.agents(), instance.alternatives());
        if self.tau.matrix().shape() != (n, m) {
            return Err(ModelError::ShapeMismatch {
                expected: (n, m),
                found: self.tau.matrix().shape(),
            });
        }
        if self.profile.len() != n {
            return Err(ModelError::ShapeMismatch {
                expected: (n, m),
                found: (self.profile.len(), m),
            });
        }
        if let Some(r) = self.profile.iter().find(|r| r.len() != m) {
            return Err(ModelError::ShapeMismatch {
                expected: (n, m),
                found: (n, r.len()),
            });
        }
        if rule.tiebreak().len() != m {
            return Err(ModelError::ShapeMismatch {
                expected: (n, m),
                found: (n, rule.tiebreak().len()),
            });
        }
        if let Some(&i) = self.coalition.iter().find(|&&i| i >= n) {
            return Err(ModelError::OutOfRange {
                what: "agent",
                index: i,
                limit: n,
            });
        }
        Ok(())
    }

    /// Standalone consistency: outsiders vote truthfully under `u + τ` and
    /// every agent paying at some alternative is a member.
    pub fn validate(&self, instance: &Instance<S>, rule: &RuleSpec) -> Result<()> {
        self.check_shape(instance, rule)?;
        let u = self.utilities(instance);
        for i in (0..instance.agents()).filter(|i| !self.is_member(*i)) {
            if let Some(a) = (0..instance.alternatives()).find(|&a| self.tau.get(i, a).is_negative()) {
                return Err(Inconsistency {
                    agent: i,
                    clause: Clause::ObservableChange { alt: a },
                }
                .into());
            }
            if Ranking::by_utility(u.row(i), rule.tiebreak()) != self.profile[i] {
                return Err(Inconsistency {
                    agent: i,
                    clause: Clause::NonTruthfulOutsider,
                }
                .into());
            }
        }
        Ok(())
    }
}

/// Checks that `to` is reachable from `from` by its coalition under `mode`
/// and returns whether every member weakly gains at the new winner with at
/// least one strict gain. Membership violations are errors, not `false`.
pub fn is_ir_deviation<S: Scalar>(
    instance: &Instance<S>,
    rule: &RuleSpec,
    from: &State<S>,
    to: &State<S>,
    mode: VariantMode,
) -> Result<bool> {
    from.check_shape(instance, rule)?;
    to.check_shape(instance, rule)?;
    check_membership(instance, rule, from, to, mode)?;
    if to.coalition.is_empty() {
        return Ok(false);
    }
    let (w, w2) = (from.winner(rule), to.winner(rule));
    let (u, u2) = (from.utilities(instance), to.utilities(instance));
    let mut strict = false;
    for &i in &to.coalition {
        let (old, new) = (&u[(i, w)], &u2[(i, w2)]);
        if new < old {
            return Ok(false);
        }
        strict |= new > old;
    }
    Ok(strict)
}

/// Membership rules for the agents outside `to.coalition`.
pub fn check_membership<S: Scalar>(
    instance: &Instance<S>,
    rule: &RuleSpec,
    from: &State<S>,
    to: &State<S>,
    mode: VariantMode,
) -> Result<()> {
    let (n, m) = (instance.agents(), instance.alternatives());
    let u2 = to.utilities(instance);
    let outsiders = || (0..n).filter(|i| !to.is_member(*i));
    for k in outsiders() {
        if let Some(alt) = observable_change(&from.tau, &to.tau, k) {
            return Err(Inconsistency {
                agent: k,
                clause: Clause::ObservableChange { alt },
            }
            .into());
        }
        let ok = match mode {
            VariantMode::Sticky => to.profile[k] == from.profile[k],
            _ => Ranking::by_utility(u2.row(k), rule.tiebreak()) == to.profile[k],
        };
        if !ok {
            let clause = match mode {
                VariantMode::Sticky => Clause::StickyVoteChanged,
                _ => Clause::NonTruthfulOutsider,
            };
            return Err(Inconsistency { agent: k, clause }.into());
        }
    }
    if mode == VariantMode::Anonymous {
        return Ok(());
    }
    for a in 0..m {
        let mut lost = S::zero();
        let mut first_loser = None;
        for k in outsiders() {
            let drop = from.tau.get(k, a).clone() - to.tau.get(k, a).clone();
            if drop.is_positive() {
                lost = lost + drop;
                first_loser.get_or_insert(k);
            }
        }
        let Some(agent) = first_loser else { continue };
        let paid = to
            .coalition
            .iter()
            .map(|&j| from.tau.get(j, a))
            .filter(|t| t.is_negative())
            .fold(S::zero(), |acc, t| acc - t.clone());
        if lost > paid {
            return Err(Inconsistency {
                agent,
                clause: Clause::UnfundedRedirect { alt: a },
            }
            .into());
        }
    }
    Ok(())
}

/// Reachable from the truthful, contract-free state (or is that state).
pub fn is_ir_feasible<S: Scalar>(instance: &Instance<S>, rule: &RuleSpec, state: &State<S>) -> Result<bool> {
    let origin = State::truthful(instance, rule);
    if state.tau.is_null() && state.profile == origin.profile {
        return Ok(true);
    }
    match is_ir_deviation(instance, rule, &origin, state, VariantMode::Standard) {
        Err(Error::Inconsistent(_)) => Ok(false),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64) -> BigRational {
        BigRational::from_int(n)
    }

    fn example() -> (Instance<BigRational>, RuleSpec, State<BigRational>) {
        let inst = Instance::from_rows(
            [[2, 4], [1, 1], [2, 3], [1, 2], [11, 3]]
                .iter()
                .map(|r| r.iter().map(|&v| q(v)).collect())
                .collect(),
        )
        .unwrap();
        let rule = RuleSpec::consensus(2, 1).unwrap();
        let tau = TransferScheme::from_rows(
            [[2, 0], [0, 0], [1, 0], [1, 0], [-4, 0]]
                .iter()
                .map(|r| r.iter().map(|&v| q(v)).collect())
                .collect(),
        )
        .unwrap();
        let profile = vec![Ranking::identity(2); 5];
        let state = State::new(profile, tau, (0..5).collect());
        (inst, rule, state)
    }

    #[test]
    fn example_state_is_consistent_and_reachable() {
        let (inst, rule, state) = example();
        state.validate(&inst, &rule).unwrap();
        let origin = State::truthful(&inst, &rule);
        assert_eq!(origin.winner(&rule), 1);
        assert_eq!(state.winner(&rule), 0);
        assert!(is_ir_deviation(&inst, &rule, &origin, &state, VariantMode::Standard).unwrap());
        assert!(is_ir_feasible(&inst, &rule, &state).unwrap());
    }

    #[test]
    fn empty_coalition_is_never_a_deviation() {
        let (inst, rule, state) = example();
        let mut same = state.clone();
        same.coalition.clear();
        assert!(!is_ir_deviation(&inst, &rule, &state, &same, VariantMode::Standard).unwrap());
    }

    #[test]
    fn silent_payer_is_rejected() {
        let (inst, rule, state) = example();
        let mut rows = state.tau.matrix().to_rows();
        rows[4][0] = q(-5);
        rows[1][0] = q(1);
        let mut to = state.clone();
        to.tau = TransferScheme::from_rows(rows).unwrap();
        to.coalition = [0, 1, 2, 3].into_iter().collect();
        let err = is_ir_deviation(&inst, &rule, &state, &to, VariantMode::Standard).unwrap_err();
        assert_eq!(
            err,
            Error::Inconsistent(Inconsistency {
                agent: 4,
                clause: Clause::ObservableChange { alt: 0 }
            })
        );
    }

    #[test]
    fn payer_outside_coalition_fails_validation() {
        let (inst, rule, mut state) = example();
        state.coalition.remove(&4);
        assert!(matches!(
            state.validate(&inst, &rule),
            Err(Error::Inconsistent(Inconsistency { agent: 4, .. }))
        ));
    }

    #[test]
    fn withdrawing_an_outsider_payment_needs_a_paying_member() {
        let (inst, rule, state) = example();
        // agent 0 loses its receipt at alt 0; only 4 paid it
        let mut rows = state.tau.matrix().to_rows();
        rows[0][0] = q(0);
        rows[2][0] = q(3);
        let tau = TransferScheme::from_rows(rows).unwrap();
        let u2 = effective_utilities(&inst, &tau).unwrap();
        let to = State::new(truthful_profile(&u2, rule.tiebreak()), tau, [2].into_iter().collect());
        let err = check_membership(&inst, &rule, &state, &to, VariantMode::Standard).unwrap_err();
        assert!(matches!(
            err,
            Error::Inconsistent(Inconsistency {
                clause: Clause::UnfundedRedirect { alt: 0 },
                ..
            })
        ));
        assert!(check_membership(&inst, &rule, &state, &to, VariantMode::Anonymous).is_ok());
    }
}
