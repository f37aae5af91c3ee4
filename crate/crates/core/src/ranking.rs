//! Strict rankings over alternatives and voting profiles.

use std::cmp::Ordering;

use crate::error::ModelError;
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// A strict order over `0..m`, most preferred first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ranking {
    order: Vec<usize>,
    position: Vec<usize>,
}

impl Ranking {
    pub fn new(order: Vec<usize>) -> Result<Self, ModelError> {
        let m = order.len();
        let mut position = vec![usize::MAX; m];
        for (p, &a) in order.iter().enumerate() {
            if a >= m || position[a] != usize::MAX {
                return Err(ModelError::NotAPermutation(order));
            }
            position[a] = p;
        }
        if m == 0 {
            return Err(ModelError::NotAPermutation(order));
        }
        Ok(Ranking { order, position })
    }

    /// `0, 1, …, m-1`.
    pub fn identity(m: usize) -> Self {
        Ranking {
            order: (0..m).collect(),
            position: (0..m).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn top(&self) -> usize {
        self.order[0]
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// 0 for the top alternative.
    pub fn position(&self, alt: usize) -> usize {
        self.position[alt]
    }

    pub fn prefers(&self, a: usize, b: usize) -> bool {
        self.position[a] < self.position[b]
    }

    /// Moves `alt` to the front, keeping the relative order of the rest.
    pub fn with_top(&self, alt: usize) -> Ranking {
        let mut order = Vec::with_capacity(self.len());
        order.push(alt);
        order.extend(self.order.iter().copied().filter(|&a| a != alt));
        Ranking::new(order).expect("moving an element keeps a permutation")
    }

    /// Sorts by descending utility, breaking ties by `tiebreak`.
    pub fn by_utility<S: Scalar>(utilities: &[S], tiebreak: &Ranking) -> Ranking {
        let mut order: Vec<usize> = (0..utilities.len()).collect();
        order.sort_by(|&a, &b| match utilities[b].partial_cmp(&utilities[a]) {
            Some(Ordering::Equal) | None => tiebreak.position(a).cmp(&tiebreak.position(b)),
            Some(o) => o,
        });
        Ranking::new(order).expect("sorting keeps a permutation")
    }
}

/// The top alternative of a utility row under `tiebreak`, without sorting.
pub fn truthful_top<S: Scalar>(utilities: &[S], tiebreak: &Ranking) -> usize {
    let mut best = 0;
    for a in 1..utilities.len() {
        let better = utilities[a] > utilities[best] || (utilities[a] == utilities[best] && tiebreak.prefers(a, best));
        if better {
            best = a;
        }
    }
    best
}

/// One ranking per agent.
pub type Profile = Vec<Ranking>;

/// Every agent's truthful ranking with respect to `utilities`.
pub fn truthful_profile<S: Scalar>(utilities: &Matrix<S>, tiebreak: &Ranking) -> Profile {
    utilities
        .iter_rows()
        .map(|row| Ranking::by_utility(row, tiebreak))
        .collect()
}

pub fn tops(profile: &[Ranking]) -> Vec<usize> {
    profile.iter().map(Ranking::top).collect()
}
