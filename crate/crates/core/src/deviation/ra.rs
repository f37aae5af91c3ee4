//! How much utility indifferent payers could redirect to one agent at a
//! rival alternative, and the lexicographic deviation that spends it.

use std::collections::BTreeSet;

use crate::deviation::witness::{finalize, DeviationWitness, WitnessCase};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{coverage_violation, Instance, TransferScheme};
use crate::ranking::{Profile, Ranking};
use crate::rule::RuleSpec;
use crate::scalar::Scalar;
use crate::state::{State, VariantMode};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RaReport<S> {
    pub target: usize,
    pub alt: usize,
    pub winner: usize,
    /// Other agents paying at `alt` who are indifferent between it and the winner.
    pub donors: Vec<usize>,
    pub ra: S,
    /// `U_j(winner) − U_j(alt)`.
    pub gap: S,
    /// `ra > gap`. Optimistic when the target is itself paid at `alt`: the
    /// amount then counts donor money the target already holds, and
    /// [`construct_ra_deviation`] may find nothing to redirect.
    pub passes: bool,
}

impl<S: Scalar> RaReport<S> {
    pub fn margin(&self) -> S {
        self.ra.clone() - self.gap.clone()
    }
}

/// Report for target `j` at `alt` against the covered winner `b`.
pub fn reallocatable_amount<S: Scalar>(
    tau: &TransferScheme<S>,
    u: &Matrix<S>,
    b: usize,
    j: usize,
    alt: usize,
) -> Result<RaReport<S>> {
    if alt == b {
        return Err(Error::Precondition("the candidate must differ from the winner".into()));
    }
    if let Some((i, _)) = coverage_violation(u, b) {
        return Err(Error::NotCovered { alt: b, agent: i });
    }
    let indifferent = indifferent_payers(tau, u, b, alt);
    Ok(report(tau, u, b, j, alt, &indifferent))
}

fn indifferent_payers<S: Scalar>(tau: &TransferScheme<S>, u: &Matrix<S>, b: usize, alt: usize) -> Vec<usize> {
    (0..u.rows())
        .filter(|&i| tau.get(i, alt).is_negative() && u[(i, b)] == u[(i, alt)])
        .collect()
}

fn report<S: Scalar>(
    tau: &TransferScheme<S>,
    u: &Matrix<S>,
    b: usize,
    j: usize,
    alt: usize,
    indifferent: &[usize],
) -> RaReport<S> {
    let donors: Vec<usize> = indifferent.iter().copied().filter(|&i| i != j).collect();
    let own = tau.get(j, alt);
    let ra = donors.iter().fold(S::zero(), |acc, &i| acc - tau.get(i, alt).clone())
        + if own.is_negative() { -own.clone() } else { S::zero() };
    let gap = u[(j, b)].clone() - u[(j, alt)].clone();
    RaReport {
        target: j,
        alt,
        winner: b,
        passes: ra > gap,
        donors,
        ra,
        gap,
    }
}

/// Best report over all targets for `alt`: largest `ra − gap`, lowest index on ties.
pub fn ra_filter<S: Scalar>(
    instance: &Instance<S>,
    rule: &RuleSpec,
    state: &State<S>,
    alt: usize,
) -> Result<RaReport<S>> {
    Ok(ra_reports(instance, rule, state, alt)?
        .into_iter()
        .reduce(|best, r| if r.margin() > best.margin() { r } else { best })
        .expect("at least one agent"))
}

/// One report per agent, ascending.
pub fn ra_reports<S: Scalar>(
    instance: &Instance<S>,
    rule: &RuleSpec,
    state: &State<S>,
    alt: usize,
) -> Result<Vec<RaReport<S>>> {
    state.check_shape(instance, rule)?;
    instance.check_alt(alt)?;
    let b = state.winner(rule);
    if alt == b {
        return Err(Error::Precondition("the candidate must differ from the winner".into()));
    }
    let u = state.utilities(instance);
    if let Some((i, _)) = coverage_violation(&u, b) {
        return Err(Error::NotCovered { alt: b, agent: i });
    }
    let indifferent = indifferent_payers(&state.tau, &u, b, alt);
    Ok((0..instance.agents())
        .map(|j| report(&state.tau, &u, b, j, alt, &indifferent))
        .collect())
}

/// Spends a passing report: the target is paid the reallocatable amount at
/// `alt`, taken from the other receivers there in proportion to what they
/// get, and a lexicographic order headed by `alt` makes it win.
pub fn construct_ra_deviation<S: Scalar>(
    instance: &Instance<S>,
    rule: &RuleSpec,
    state: &State<S>,
    report: &RaReport<S>,
) -> Result<DeviationWitness<S>> {
    if !report.passes {
        return Err(Error::Precondition(format!(
            "agent {} cannot be paid enough at alternative {}",
            report.target, report.alt
        )));
    }
    let (j, alt) = (report.target, report.alt);
    let receivers: Vec<usize> = (0..instance.agents())
        .filter(|&i| i != j && state.tau.get(i, alt).is_positive())
        .collect();
    let pool = receivers
        .iter()
        .fold(S::zero(), |acc, &i| acc + state.tau.get(i, alt).clone());
    // When the target is itself a receiver the others may hold less than the
    // full amount; spend what exists and let the gain check decide.
    let funding = if pool < report.ra {
        pool.clone()
    } else {
        report.ra.clone()
    };
    if funding <= report.gap {
        return Err(Error::WitnessRejected(format!(
            "receivers at alternative {alt} hold {pool}, not enough to beat the gap {}",
            report.gap
        )));
    }

    let mut tau = state.tau.matrix().clone();
    tau[(j, alt)] = tau[(j, alt)].clone() + funding.clone();
    for &i in &receivers {
        let share = funding.clone() * state.tau.get(i, alt).clone() / pool.clone();
        tau[(i, alt)] = tau[(i, alt)].clone() - share;
    }
    let tau = TransferScheme::from_matrix_unchecked(tau);

    let m = instance.alternatives();
    let mut order = vec![alt];
    order.extend(rule.tiebreak().order().iter().copied().filter(|&a| a != alt));
    let lex = RuleSpec::lexicographic(Ranking::new(order)?).with_tiebreak(rule.tiebreak().clone())?;
    debug_assert_eq!(lex.tiebreak().len(), m);

    let u2 = crate::model::effective_utilities(instance, &tau)?;
    let mut coalition: BTreeSet<usize> = report.donors.iter().copied().collect();
    coalition.insert(j);
    let profile: Profile = (0..instance.agents())
        .map(|i| {
            let truthful = Ranking::by_utility(u2.row(i), lex.tiebreak());
            if i == j {
                truthful.with_top(alt)
            } else if coalition.contains(&i) {
                truthful.with_top(report.winner)
            } else {
                truthful
            }
        })
        .collect();
    let to = State::new(profile, tau, coalition);
    finalize(
        instance,
        state,
        &lex,
        rule,
        to,
        VariantMode::Standard,
        WitnessCase::Reallocation,
        Some(funding),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(v: i64) -> Rational {
        Rational::from_int(v)
    }

    fn mat(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect()
    }

    fn example_state() -> (Instance<Rational>, RuleSpec, State<Rational>) {
        let inst = Instance::from_rows(mat(&[&[2, 4], &[1, 1], &[2, 3], &[1, 2], &[11, 3]])).unwrap();
        let rule = RuleSpec::consensus(2, 1).unwrap();
        let tau = TransferScheme::from_rows(mat(&[&[2, 0], &[0, 0], &[1, 0], &[1, 0], &[-4, 0]])).unwrap();
        let state = State::new(vec![Ranking::identity(2); 5], tau, (0..5).collect());
        (inst, rule, state)
    }

    #[test]
    fn zero_transfers_reallocate_nothing() {
        let inst = Instance::from_rows(mat(&[&[3, 1], &[1, 1]])).unwrap();
        let u = inst.utilities().clone();
        let r = reallocatable_amount(&TransferScheme::zero(2, 2), &u, 0, 0, 1).unwrap();
        assert_eq!((r.ra, r.gap, r.passes), (q(0), q(2), false));
    }

    #[test]
    fn example_winner_cannot_be_overturned() {
        let (inst, rule, state) = example_state();
        let r = reallocatable_amount(&state.tau, &state.utilities(&inst), 0, 4, 1).unwrap();
        assert!(r.donors.is_empty());
        assert_eq!((r.ra, r.gap, r.passes), (q(0), q(4), false));
        for r in ra_reports(&inst, &rule, &state, 1).unwrap() {
            assert!(!r.passes);
        }
    }

    /// Agent 0 pays 3 at alt 1 to agent 2 and is indifferent between the two.
    fn indifferent_payer() -> (Instance<Rational>, RuleSpec, State<Rational>) {
        let inst = Instance::from_rows(mat(&[&[1, 4], &[3, 2], &[5, 0]])).unwrap();
        let rule = RuleSpec::consensus(2, 1).unwrap();
        let tau = TransferScheme::from_rows(mat(&[&[0, -3], &[0, 0], &[0, 3]])).unwrap();
        let state = State::new(vec![Ranking::identity(2); 3], tau, [0].into_iter().collect());
        (inst, rule, state)
    }

    #[test]
    fn indifferent_payer_funds_another_agent() {
        let (inst, rule, state) = indifferent_payer();
        let r = reallocatable_amount(&state.tau, &state.utilities(&inst), 0, 1, 1).unwrap();
        assert_eq!(r.donors, vec![0]);
        assert_eq!((r.ra.clone(), r.gap.clone(), r.passes), (q(3), q(1), true));
        let w = construct_ra_deviation(&inst, &rule, &state, &r).unwrap();
        assert_eq!(w.winner(), 1);
        assert_eq!(w.to_state.tau.get(1, 1), &q(3));
        assert_eq!(w.to_state.tau.get(2, 1), &q(0));
        assert_eq!(w.to_state.coalition, [0, 1].into_iter().collect());
        assert_eq!(w.gains, vec![(0, q(0)), (1, q(2))]);
    }

    #[test]
    fn best_target_is_the_payer_itself() {
        let (inst, rule, state) = indifferent_payer();
        let best = ra_filter(&inst, &rule, &state, 1).unwrap();
        assert_eq!((best.target, best.ra.clone(), best.gap.clone()), (0, q(3), q(0)));
        let w = construct_ra_deviation(&inst, &rule, &state, &best).unwrap();
        assert_eq!(w.gains, vec![(0, q(3))]);
    }

    #[test]
    fn own_payment_alone_can_fund() {
        let inst = Instance::from_rows(mat(&[&[3, 4], &[3, 0]])).unwrap();
        let rule = RuleSpec::consensus(2, 1).unwrap();
        let tau = TransferScheme::from_rows(mat(&[&[0, -3], &[0, 3]])).unwrap();
        let state = State::new(vec![Ranking::identity(2); 2], tau, [0].into_iter().collect());
        let r = reallocatable_amount(&state.tau, &state.utilities(&inst), 0, 0, 1).unwrap();
        assert!(r.donors.is_empty());
        assert_eq!((r.ra.clone(), r.gap.clone(), r.passes), (q(3), q(2), true));
        let w = construct_ra_deviation(&inst, &rule, &state, &r).unwrap();
        assert_eq!(w.epsilon, Some(q(3)));
        assert_eq!(w.gains, vec![(0, q(1))]);
    }

    #[test]
    fn failing_report_is_refused() {
        let (inst, rule, state) = example_state();
        let r = ra_filter(&inst, &rule, &state, 1).unwrap();
        assert!(matches!(
            construct_ra_deviation(&inst, &rule, &state, &r),
            Err(Error::Precondition(_))
        ));
    }
}
