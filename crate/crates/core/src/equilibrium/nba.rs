//! Next-best alternatives and the donors that pin them.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{coverage_violation, effective_utilities, Instance, TransferScheme};
use crate::scalar::Scalar;

/// Donors at one alternative `x`: everyone paying there, and the subset
/// already indifferent between `x` and the winner.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DonorSets {
    pub donors: Vec<usize>,
    pub tight: Vec<usize>,
}

impl DonorSets {
    /// Every donor is tight (vacuously so when nobody pays).
    pub fn all_tight(&self) -> bool {
        self.donors.len() == self.tight.len()
    }

    /// Lowest-index donor that still strictly prefers the winner.
    pub fn first_loose(&self) -> Option<usize> {
        self.donors.iter().copied().find(|j| !self.tight.contains(j))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NbaReport {
    pub agent: usize,
    pub winner: usize,
    /// Rivals of the winner with the highest utility for `agent`, ascending.
    pub nba: Vec<usize>,
    /// Members of `nba` where every donor is tight. Only defined for agents
    /// paid at every next-best alternative tied with the winner; empty otherwise.
    pub binding: Vec<usize>,
    pub donor_sets: BTreeMap<usize, DonorSets>,
}

/// Checks coverage of `b`, then computes the report.
pub fn nba_report<S: Scalar>(
    instance: &Instance<S>,
    tau: &TransferScheme<S>,
    b: usize,
    agent: usize,
) -> Result<NbaReport> {
    instance.check_alt(b)?;
    instance.check_agent(agent)?;
    if instance.alternatives() < 2 {
        return Err(Error::Precondition(
            "next-best alternatives need at least two alternatives".into(),
        ));
    }
    let u = effective_utilities(instance, tau)?;
    if let Some((i, _)) = coverage_violation(&u, b) {
        return Err(Error::NotCovered { alt: b, agent: i });
    }
    Ok(nba_report_unchecked(&u, tau, b, agent))
}

/// Same as [`nba_report`] on precomputed utilities, skipping the coverage check.
pub fn nba_report_unchecked<S: Scalar>(u: &Matrix<S>, tau: &TransferScheme<S>, b: usize, agent: usize) -> NbaReport {
    let nba = next_best(u.row(agent), b);
    let paid_at_ties = nba
        .iter()
        .all(|&x| u[(agent, x)] != u[(agent, b)] || tau.get(agent, x).is_positive());
    let mut donor_sets = BTreeMap::new();
    let mut binding = Vec::new();
    for &x in &nba {
        let sets = donor_sets_at(u, tau, b, x);
        if paid_at_ties && sets.all_tight() {
            binding.push(x);
        }
        donor_sets.insert(x, sets);
    }
    NbaReport {
        agent,
        winner: b,
        nba,
        binding,
        donor_sets,
    }
}

/// `argmax_{a ≠ b} row[a]`, ascending; empty when `b` is the only alternative.
pub fn next_best<S: Scalar>(row: &[S], b: usize) -> Vec<usize> {
    let mut best: Option<&S> = None;
    let mut out = Vec::new();
    for (a, v) in row.iter().enumerate().filter(|(a, _)| *a != b) {
        match best {
            Some(cur) if v < cur => {}
            Some(cur) if v == cur => out.push(a),
            _ => {
                best = Some(v);
                out.clear();
                out.push(a);
            }
        }
    }
    out
}

pub fn donor_sets_at<S: Scalar>(u: &Matrix<S>, tau: &TransferScheme<S>, b: usize, x: usize) -> DonorSets {
    let mut sets = DonorSets::default();
    for j in 0..u.rows() {
        if tau.get(j, x).is_negative() {
            sets.donors.push(j);
            if u[(j, x)] == u[(j, b)] {
                sets.tight.push(j);
            }
        }
    }
    sets
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(v: i64) -> Rational {
        Rational::from_int(v)
    }

    fn example() -> (Instance<Rational>, TransferScheme<Rational>) {
        let inst = Instance::from_rows(vec![
            vec![q(2), q(4)],
            vec![q(1), q(1)],
            vec![q(2), q(3)],
            vec![q(1), q(2)],
            vec![q(11), q(3)],
        ])
        .unwrap();
        let tau = TransferScheme::from_rows(vec![
            vec![q(2), q(0)],
            vec![q(0), q(0)],
            vec![q(1), q(0)],
            vec![q(1), q(0)],
            vec![q(-4), q(0)],
        ])
        .unwrap();
        (inst, tau)
    }

    #[test]
    fn two_alternatives_force_the_other_one() {
        let (inst, tau) = example();
        let r = nba_report(&inst, &tau, 0, 4).unwrap();
        assert_eq!(r.nba, vec![1]);
    }

    #[test]
    fn unpaid_tie_has_no_binding_set() {
        let (inst, tau) = example();
        let r = nba_report(&inst, &tau, 0, 0).unwrap();
        assert_eq!(r.nba, vec![1]);
        assert!(r.donor_sets[&1].donors.is_empty());
        assert!(r.binding.is_empty());
    }

    #[test]
    fn tight_donors_make_a_binding_alternative() {
        // agent 0 is paid at both alternatives; agent 2 pays at 1 and is indifferent
        let inst = Instance::from_rows(vec![vec![q(0), q(0)], vec![q(2), q(0)], vec![q(1), q(2)]]).unwrap();
        let tau = TransferScheme::from_rows(vec![vec![q(1), q(1)], vec![q(-1), q(0)], vec![q(0), q(-1)]]).unwrap();
        let r = nba_report(&inst, &tau, 0, 0).unwrap();
        assert_eq!(r.binding, vec![1]);
        assert_eq!(r.donor_sets[&1].tight, vec![2]);
    }

    #[test]
    fn unique_rival_argmax() {
        assert_eq!(next_best(&[q(5), q(5), q(3)], 0), vec![1]);
        assert_eq!(next_best(&[q(5), q(4), q(4)], 0), vec![1, 2]);
        assert!(next_best(&[q(1)], 0).is_empty());
    }

    #[test]
    fn uncovered_winner_is_rejected() {
        let (inst, tau) = example();
        assert_eq!(
            nba_report(&inst, &tau, 1, 0).unwrap_err(),
            Error::NotCovered { alt: 1, agent: 4 }
        );
    }
}
