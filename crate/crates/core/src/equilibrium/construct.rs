//! Builds a stable state for the consensus rule in one sweep over the
//! alternatives, ordered by social welfare.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{Instance, TransferScheme};
use crate::ranking::Ranking;
use crate::rule::{RuleSpec, VotingRule};
use crate::scalar::Scalar;
use crate::state::State;

/// The constructed state plus the bookkeeping that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Construction<S> {
    pub state: State<S>,
    pub winner: usize,
    /// Alternatives by descending welfare; the default heads everything it ties with.
    pub order: Vec<usize>,
    /// Agents who gave up surplus to lift an alternative above the default.
    pub donors: BTreeSet<usize>,
}

/// Stable state under consensus with default `default` and the identity tiebreak.
pub fn construct_ir_sne<S: Scalar>(instance: &Instance<S>, default: usize) -> Result<State<S>> {
    let rule = RuleSpec::consensus(instance.alternatives(), default)?;
    Ok(construct(instance, &rule)?.state)
}

pub fn construct<S: Scalar>(instance: &Instance<S>, rule: &RuleSpec) -> Result<Construction<S>> {
    let Some(d) = rule.default_alt() else {
        return Err(Error::UnsupportedRule("the construction needs a consensus rule"));
    };
    if rule.alternatives() != instance.alternatives() {
        return Err(crate::error::ModelError::ShapeMismatch {
            expected: (instance.agents(), instance.alternatives()),
            found: (instance.agents(), rule.alternatives()),
        }
        .into());
    }
    let (n, m) = (instance.agents(), instance.alternatives());
    let sw: Vec<S> = (0..m).map(|a| instance.social_welfare(a)).collect();
    let order = welfare_order(&sw, d);

    // A unanimous top can beat a poor default; either way sincere voting is
    // already stable once it elects a maximizer.
    let truthful = State::truthful(instance, rule);
    let winner = truthful.winner(rule);
    if instance.is_welfare_maximizer(winner) {
        return Ok(Construction {
            state: truthful,
            winner,
            order,
            donors: BTreeSet::new(),
        });
    }

    let u = instance.utilities();
    let mut big_u = Matrix::zeros(n, m);
    let mut tau = Matrix::zeros(n, m);
    let split = order.iter().position(|&a| a == d).expect("default is ordered");

    for i in 0..n {
        big_u[(i, d)] = u[(i, d)].clone();
    }
    for &t in &order[split + 1..] {
        for i in 0..n {
            let scaled = if sw[d].is_zero() {
                S::zero()
            } else {
                sw[t].clone() / sw[d].clone() * u[(i, d)].clone()
            };
            tau[(i, t)] = scaled.clone() - u[(i, t)].clone();
            big_u[(i, t)] = scaled;
        }
    }

    let mut donors = BTreeSet::new();
    for k in (0..split).rev() {
        let (t, below) = (order[k], order[k + 1]);
        let mut deficit = S::zero();
        let mut surplus = S::zero();
        for i in 0..n {
            let diff = u[(i, t)].clone() - big_u[(i, below)].clone();
            if diff.is_negative() {
                deficit = deficit - diff;
            } else if diff.is_positive() {
                surplus = surplus + diff;
            }
        }
        for i in 0..n {
            let diff = u[(i, t)].clone() - big_u[(i, below)].clone();
            let paid = if diff.is_negative() {
                -diff
            } else if diff.is_positive() && deficit.is_positive() {
                donors.insert(i);
                -(deficit.clone() * diff / surplus.clone())
            } else {
                S::zero()
            };
            big_u[(i, t)] = u[(i, t)].clone() + paid.clone();
            tau[(i, t)] = paid;
        }
    }

    let b = order[0];
    let tiebreak = rule.tiebreak();
    let mut coalition = donors.clone();
    let profile = (0..n)
        .map(|i| {
            let truthful = Ranking::by_utility(big_u.row(i), tiebreak);
            let cast = truthful.with_top(b);
            let row = u.row(i);
            let best = crate::scalar::max_of(row.iter().cloned()).expect("m >= 1");
            if cast != truthful
                || row[b] != best
                || tau.row(i).iter().any(|v| v.is_negative())
                || argmax_set(row) != argmax_set(big_u.row(i))
                // someone in the coalition has to gain strictly over the truthful outcome
                || big_u[(i, b)] > u[(i, d)]
            {
                coalition.insert(i);
            }
            cast
        })
        .collect();
    let state = State::new(profile, TransferScheme::from_matrix_unchecked(tau), coalition);
    debug_assert_eq!(state.winner(rule), b);
    Ok(Construction {
        state,
        winner: b,
        order,
        donors,
    })
}

/// Descending welfare, index order on ties, except that the default comes
/// before every alternative it ties with.
pub fn welfare_order<S: Scalar>(sw: &[S], default: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sw.len()).collect();
    order.sort_by(|&a, &b| {
        sw[b]
            .partial_cmp(&sw[a])
            .expect("welfare is comparable")
            .then_with(|| (b == default).cmp(&(a == default)))
            .then(a.cmp(&b))
    });
    order
}

fn argmax_set<S: Scalar>(row: &[S]) -> Vec<usize> {
    let best = crate::scalar::max_of(row.iter().cloned()).expect("m >= 1");
    (0..row.len()).filter(|&a| row[a] == best).collect()
}
