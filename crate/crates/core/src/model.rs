//! Instances, contracts and net transfer schemes.

use crate::error::ModelError;
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Agents, alternatives and nonnegative base utilities `u[i][a]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance<S> {
    utilities: Matrix<S>,
}

impl<S: Scalar> Instance<S> {
    pub fn new(utilities: Matrix<S>) -> Result<Self, ModelError> {
        let (n, m) = utilities.shape();
        if n == 0 || m == 0 {
            return Err(ModelError::Empty);
        }
        for i in 0..n {
            for a in 0..m {
                if utilities[(i, a)].is_negative() {
                    return Err(ModelError::NegativeUtility { agent: i, alt: a });
                }
            }
        }
        Ok(Instance { utilities })
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self, ModelError> {
        Instance::new(Matrix::from_rows(rows)?)
    }

    pub fn agents(&self) -> usize {
        self.utilities.rows()
    }

    pub fn alternatives(&self) -> usize {
        self.utilities.cols()
    }

    pub fn utilities(&self) -> &Matrix<S> {
        &self.utilities
    }

    pub fn utility(&self, agent: usize, alt: usize) -> &S {
        &self.utilities[(agent, alt)]
    }

    /// Sum of base utilities at `alt`.
    pub fn social_welfare(&self, alt: usize) -> S {
        self.utilities.column_sum(alt)
    }

    pub fn max_welfare(&self) -> S {
        (1..self.alternatives())
            .map(|a| self.social_welfare(a))
            .fold(self.social_welfare(0), |best, w| if w > best { w } else { best })
    }

    /// All welfare maximizers in ascending index order.
    pub fn welfare_maximizers(&self) -> Vec<usize> {
        let best = self.max_welfare();
        (0..self.alternatives())
            .filter(|&a| self.social_welfare(a) == best)
            .collect()
    }

    pub fn is_welfare_maximizer(&self, alt: usize) -> bool {
        self.social_welfare(alt) == self.max_welfare()
    }

    pub(crate) fn check_alt(&self, alt: usize) -> Result<(), ModelError> {
        if alt < self.alternatives() {
            Ok(())
        } else {
            Err(ModelError::OutOfRange {
                what: "alternative",
                index: alt,
                limit: self.alternatives(),
            })
        }
    }

    pub(crate) fn check_agent(&self, agent: usize) -> Result<(), ModelError> {
        if agent < self.agents() {
            Ok(())
        } else {
            Err(ModelError::OutOfRange {
                what: "agent",
                index: agent,
                limit: self.agents(),
            })
        }
    }
}

/// Raw bilateral promises `c[i][j][a]`: agent `i` pays `j` if `a` wins.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractMatrix<S> {
    agents: usize,
    alternatives: usize,
    promises: Vec<S>,
}

impl<S: Scalar> ContractMatrix<S> {
    pub fn empty(agents: usize, alternatives: usize) -> Self {
        ContractMatrix {
            agents,
            alternatives,
            promises: vec![S::zero(); agents * agents * alternatives],
        }
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn alternatives(&self) -> usize {
        self.alternatives
    }

    fn offset(&self, from: usize, to: usize, alt: usize) -> usize {
        (from * self.agents + to) * self.alternatives + alt
    }

    fn check(&self, from: usize, to: usize, alt: usize) -> Result<(), ModelError> {
        for (what, index, limit) in [
            ("agent", from, self.agents),
            ("agent", to, self.agents),
            ("alternative", alt, self.alternatives),
        ] {
            if index >= limit {
                return Err(ModelError::OutOfRange { what, index, limit });
            }
        }
        if from == to {
            return Err(ModelError::SelfPromise { agent: from });
        }
        Ok(())
    }

    pub fn promise(&self, from: usize, to: usize, alt: usize) -> &S {
        &self.promises[self.offset(from, to, alt)]
    }

    /// Sets the promise from `from` to `to` at `alt`.
    pub fn set_promise(&mut self, from: usize, to: usize, alt: usize, amount: S) -> Result<(), ModelError> {
        self.check(from, to, alt)?;
        if amount.is_negative() {
            return Err(ModelError::NegativePromise { from, to, alt });
        }
        let k = self.offset(from, to, alt);
        self.promises[k] = amount;
        Ok(())
    }

    /// Adds `delta` to every promise along the directed cycle
    /// `cycle[0] → cycle[1] → … → cycle[0]` at `alt`. Net transfers are unchanged.
    pub fn add_cycle(&mut self, cycle: &[usize], alt: usize, delta: S) -> Result<(), ModelError> {
        for (k, &from) in cycle.iter().enumerate() {
            let to = cycle[(k + 1) % cycle.len()];
            self.check(from, to, alt)?;
            let o = self.offset(from, to, alt);
            let next = self.promises[o].clone() + delta.clone();
            if next.is_negative() {
                return Err(ModelError::NegativePromise { from, to, alt });
            }
            self.promises[o] = next;
        }
        Ok(())
    }

    /// Nets promises into `τ_i(a) = Σ_j c[j][i][a] − Σ_j c[i][j][a]`.
    pub fn net(&self) -> TransferScheme<S> {
        let mut tau: Matrix<S> = Matrix::zeros(self.agents, self.alternatives);
        for from in 0..self.agents {
            for to in 0..self.agents {
                if from == to {
                    continue;
                }
                for a in 0..self.alternatives {
                    let c = &self.promises[self.offset(from, to, a)];
                    if c.is_zero() {
                        continue;
                    }
                    tau[(to, a)] = tau[(to, a)].clone() + c.clone();
                    tau[(from, a)] = tau[(from, a)].clone() - c.clone();
                }
            }
        }
        TransferScheme { tau }
    }
}

/// Net transfers `τ_i(a)`, budget balanced at every alternative.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TransferScheme<S> {
    tau: Matrix<S>,
}

impl<S: Scalar> TransferScheme<S> {
    /// The null contract.
    pub fn zero(agents: usize, alternatives: usize) -> Self {
        TransferScheme {
            tau: Matrix::zeros(agents, alternatives),
        }
    }

    /// Validates budget balance exactly.
    pub fn new(tau: Matrix<S>) -> Result<Self, ModelError> {
        for a in 0..tau.cols() {
            if !tau.column_sum(a).is_zero() {
                return Err(ModelError::Unbalanced { alt: a });
            }
        }
        Ok(TransferScheme { tau })
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self, ModelError> {
        TransferScheme::new(Matrix::from_rows(rows)?)
    }

    /// Skips the balance check. Callers must construct balanced columns.
    pub(crate) fn from_matrix_unchecked(tau: Matrix<S>) -> Self {
        TransferScheme { tau }
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.tau
    }

    pub fn into_matrix(self) -> Matrix<S> {
        self.tau
    }

    pub fn get(&self, agent: usize, alt: usize) -> &S {
        &self.tau[(agent, alt)]
    }

    pub fn agents(&self) -> usize {
        self.tau.rows()
    }

    pub fn alternatives(&self) -> usize {
        self.tau.cols()
    }

    pub fn is_budget_balanced(&self) -> bool {
        (0..self.tau.cols()).all(|a| self.tau.column_sum(a).is_zero())
    }

    pub fn is_null(&self) -> bool {
        self.tau.is_zero()
    }
}

/// Realized utilities `U = u + τ`.
pub fn effective_utilities<S: Scalar>(
    instance: &Instance<S>,
    tau: &TransferScheme<S>,
) -> Result<Matrix<S>, ModelError> {
    instance.utilities().add(tau.matrix())
}

/// `b` weakly dominates every alternative for every agent under `U`.
pub fn full_coverage<S: Scalar>(utilities: &Matrix<S>, b: usize) -> bool {
    utilities.iter_rows().all(|row| row.iter().all(|v| row[b] >= *v))
}

/// First agent (and the alternative it prefers) breaking coverage of `b`.
pub fn coverage_violation<S: Scalar>(utilities: &Matrix<S>, b: usize) -> Option<(usize, usize)> {
    utilities
        .iter_rows()
        .enumerate()
        .find_map(|(i, row)| row.iter().enumerate().find(|(_, v)| **v > row[b]).map(|(a, _)| (i, a)))
}

/// Whether the change from `before` to `after` reveals that agent `i` acted:
/// some alternative where it went from non-positive to strictly lower, or
/// from non-negative to strictly negative.
pub fn observable_participation<S: Scalar>(
    before: &TransferScheme<S>,
    after: &TransferScheme<S>,
    agent: usize,
) -> bool {
    observable_change(before, after, agent).is_some()
}

/// Alternative witnessing [`observable_participation`], if any.
pub fn observable_change<S: Scalar>(
    before: &TransferScheme<S>,
    after: &TransferScheme<S>,
    agent: usize,
) -> Option<usize> {
    (0..before.alternatives()).find(|&a| {
        let old = before.get(agent, a);
        let new = after.get(agent, a);
        (!old.is_positive() && new < old) || (!old.is_negative() && new.is_negative())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::Zero;

    fn q(n: i64) -> BigRational {
        BigRational::from_int(n)
    }

    #[test]
    fn three_cycle_nets_to_incoming_minus_outgoing() {
        let mut c = ContractMatrix::empty(3, 1);
        c.set_promise(0, 1, 0, q(2)).unwrap();
        c.set_promise(1, 2, 0, q(3)).unwrap();
        c.set_promise(2, 0, 0, q(4)).unwrap();
        let tau = c.net();
        assert_eq!(
            tau.matrix().column(0).cloned().collect::<Vec<_>>(),
            vec![q(2), q(-1), q(-1)]
        );
        assert!(tau.is_budget_balanced());
    }

    #[test]
    fn single_promise_and_empty_netting() {
        let mut c = ContractMatrix::empty(2, 2);
        assert!(c.net().is_null());
        c.set_promise(0, 1, 1, q(5)).unwrap();
        let tau = c.net();
        assert_eq!(*tau.get(0, 1), q(-5));
        assert_eq!(*tau.get(1, 1), q(5));
        assert!(tau.get(0, 0).is_zero());
    }

    #[test]
    fn promise_validation() {
        let mut c = ContractMatrix::<BigRational>::empty(2, 1);
        assert_eq!(c.set_promise(1, 1, 0, q(1)), Err(ModelError::SelfPromise { agent: 1 }));
        assert!(matches!(
            c.set_promise(0, 1, 0, q(-1)),
            Err(ModelError::NegativePromise { .. })
        ));
        assert!(matches!(
            c.set_promise(0, 2, 0, q(1)),
            Err(ModelError::OutOfRange { .. })
        ));
    }

    #[test]
    fn unbalanced_scheme_rejected() {
        let err = TransferScheme::from_rows(vec![vec![q(1)], vec![q(0)]]).unwrap_err();
        assert_eq!(err, ModelError::Unbalanced { alt: 0 });
    }

    #[test]
    fn negative_utilities_rejected() {
        let err = Instance::from_rows(vec![vec![q(1), q(-1)]]).unwrap_err();
        assert_eq!(err, ModelError::NegativeUtility { agent: 0, alt: 1 });
        assert_eq!(
            Instance::<BigRational>::from_rows(vec![]).unwrap_err(),
            ModelError::Empty
        );
    }

    #[test]
    fn observable_participation_clauses() {
        let t = |v: i64| TransferScheme::from_rows(vec![vec![q(v)], vec![q(-v)]]).unwrap();
        assert!(observable_participation(&t(0), &t(-1), 0));
        assert!(!observable_participation(&t(0), &t(0), 0));
        assert!(!observable_participation(&t(2), &t(1), 0));
        assert!(observable_participation(&t(2), &t(-1), 0));
        // agent 1 goes -2 -> -1: paying less is never observable
        assert!(!observable_participation(&t(2), &t(1), 1));
    }

    #[test]
    fn coverage_single_alternative() {
        let u = Matrix::from_rows(vec![vec![q(3)], vec![q(0)]]).unwrap();
        assert!(full_coverage(&u, 0));
        assert_eq!(coverage_violation(&u, 0), None);
    }
}
