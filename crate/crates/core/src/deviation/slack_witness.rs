//! Redistributions that squeeze a receiver with slack.

use std::collections::BTreeSet;

use crate::deviation::witness::{finalize, target_state, DeviationWitness, WitnessCase};
use crate::equilibrium::slack::{SlackVerdict, WitnessPlan};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{Instance, TransferScheme};
use crate::rule::RuleSpec;
use crate::scalar::Scalar;
use crate::state::{State, VariantMode};

/// Materializes the plan carried by `verdict`. The winner stays put and the
/// receiver is never a member.
pub fn construct_slack_witness<S: Scalar>(
    instance: &Instance<S>,
    rule: &RuleSpec,
    state: &State<S>,
    verdict: &SlackVerdict<S>,
) -> Result<DeviationWitness<S>> {
    let plan = verdict
        .plan
        .as_ref()
        .ok_or_else(|| Error::Precondition(format!("agent {} has no exploitable slack", verdict.agent)))?;
    let b = verdict.winner;
    let mut tau = state.tau.matrix().clone();
    let mut members = BTreeSet::new();
    let shift = |tau: &mut Matrix<S>, k: usize, a: usize, d: &S| {
        tau[(k, a)] = tau[(k, a)].clone() + d.clone();
    };
    let (case, epsilon) = match plan {
        WitnessPlan::StrictSlack {
            receiver,
            router,
            amount,
        } => {
            shift(&mut tau, *receiver, b, &-amount.clone());
            shift(&mut tau, *router, b, amount);
            members.insert(*router);
            (WitnessCase::StrictSlack, amount.clone())
        }
        WitnessPlan::LooseDonors {
            receiver,
            nba,
            loose,
            router,
            epsilon,
        } => {
            squeeze(&mut tau, *receiver, b, nba, epsilon);
            for &(x, j) in loose {
                shift(&mut tau, j, x, epsilon);
                members.insert(j);
            }
            shift(&mut tau, *router, b, &epsilon.half());
            members.insert(*router);
            (WitnessCase::LooseDonors, epsilon.clone())
        }
        WitnessPlan::BindingDonor {
            receiver,
            nba,
            binding,
            absorber,
            loose,
            router,
            epsilon,
        } => {
            squeeze(&mut tau, *receiver, b, nba, epsilon);
            for &(x, j) in loose {
                shift(&mut tau, j, x, epsilon);
                members.insert(j);
            }
            for &x in binding {
                shift(&mut tau, *absorber, x, epsilon);
            }
            shift(&mut tau, *absorber, b, &epsilon.half());
            members.insert(*absorber);
            members.insert(*router);
            (WitnessCase::BindingDonor, epsilon.clone())
        }
    };
    let tau = TransferScheme::from_matrix_unchecked(tau);
    let to = target_state(instance, rule, tau, members, b)?;
    finalize(
        instance,
        state,
        rule,
        rule,
        to,
        VariantMode::Standard,
        case,
        Some(epsilon),
    )
}

/// The receiver gives up `epsilon` at every next-best rival and half of it at
/// the winner, so it ends up strictly preferring the winner.
fn squeeze<S: Scalar>(tau: &mut Matrix<S>, i: usize, b: usize, nba: &[usize], epsilon: &S) {
    for &x in nba {
        tau[(i, x)] = tau[(i, x)].clone() - epsilon.clone();
    }
    tau[(i, b)] = tau[(i, b)].clone() - epsilon.half();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::slack::slack_conditions;
    use crate::ranking::Ranking;
    use crate::Rational;

    fn q(v: i64) -> Rational {
        Rational::from_int(v)
    }

    fn mat(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect()
    }

    fn witness(u: &[&[i64]], tau: &[&[i64]], members: &[usize], receiver: usize) -> DeviationWitness<Rational> {
        let inst = Instance::from_rows(mat(u)).unwrap();
        let m = inst.alternatives();
        let rule = RuleSpec::consensus(m, m - 1).unwrap();
        let state = State::new(
            vec![Ranking::identity(m); inst.agents()],
            TransferScheme::from_rows(mat(tau)).unwrap(),
            members.iter().copied().collect(),
        );
        let verdict = slack_conditions(&inst, &rule, &state, receiver).unwrap();
        construct_slack_witness(&inst, &rule, &state, &verdict).unwrap()
    }

    #[test]
    fn strict_slack_moves_half_a_unit() {
        let w = witness(&[&[5, 0], &[0, 1]], &[&[-2, 0], &[2, 0]], &[0], 1);
        assert_eq!(w.case, WitnessCase::StrictSlack);
        let half = Rational::new(1.into(), 2.into());
        assert_eq!(w.to_state.tau.get(0, 0), &(q(-2) + half.clone()));
        assert_eq!(w.to_state.tau.get(1, 0), &(q(2) - half.clone()));
        assert_eq!(w.gains, vec![(0, half)]);
        assert!(!w.to_state.coalition.contains(&1));
    }

    #[test]
    fn loose_donor_witness() {
        let w = witness(&[&[0, 0], &[4, 2], &[0, 0]], &[&[1, 1], &[-1, -1], &[0, 0]], &[1], 0);
        assert_eq!(w.case, WitnessCase::LooseDonors);
        assert_eq!(w.winner(), 0);
        assert!(w.to_state.tau.is_budget_balanced());
    }

    #[test]
    fn binding_donor_witness() {
        let w = witness(&[&[0, 0], &[2, 0], &[1, 2]], &[&[1, 1], &[-1, 0], &[0, -1]], &[1, 2], 0);
        assert_eq!(w.case, WitnessCase::BindingDonor);
        assert_eq!(w.to_state.coalition, [1, 2].into_iter().collect());
        assert!(w.to_state.tau.is_budget_balanced());
    }

    #[test]
    fn no_plan_no_witness() {
        let inst = Instance::from_rows(mat(&[&[5, 0], &[0, 1]])).unwrap();
        let rule = RuleSpec::consensus(2, 1).unwrap();
        let state = State::new(
            vec![Ranking::identity(2); 2],
            TransferScheme::from_rows(mat(&[&[-1, 0], &[1, 0]])).unwrap(),
            [0].into_iter().collect(),
        );
        let verdict = slack_conditions(&inst, &rule, &state, 1).unwrap();
        assert!(matches!(
            construct_slack_witness(&inst, &rule, &state, &verdict),
            Err(Error::Precondition(_))
        ));
    }
}
