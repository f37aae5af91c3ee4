//! The two top-only voting rules and exhaustive property checks.

use crate::error::ModelError;
use crate::ranking::{Profile, Ranking};

/// Anything mapping a profile to a single alternative.
pub trait VotingRule {
    fn alternatives(&self) -> usize;
    fn winner(&self, profile: &[Ranking]) -> usize;
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RuleKind {
    /// The unanimous top wins, otherwise `default`.
    Consensus { default: usize },
    /// The unanimous top wins, otherwise the earliest alternative in `order`
    /// that somebody ranks first.
    Lexicographic { order: Ranking },
}

/// A rule together with the global tie-breaking order used to derive
/// truthful votes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RuleSpec {
    kind: RuleKind,
    tiebreak: Ranking,
}

impl RuleSpec {
    pub fn consensus(m: usize, default: usize) -> Result<Self, ModelError> {
        if default >= m {
            return Err(ModelError::OutOfRange {
                what: "alternative",
                index: default,
                limit: m,
            });
        }
        Ok(RuleSpec {
            kind: RuleKind::Consensus { default },
            tiebreak: Ranking::identity(m),
        })
    }

    pub fn lexicographic(order: Ranking) -> Self {
        let m = order.len();
        RuleSpec {
            kind: RuleKind::Lexicographic { order },
            tiebreak: Ranking::identity(m),
        }
    }

    pub fn with_tiebreak(mut self, tiebreak: Ranking) -> Result<Self, ModelError> {
        if tiebreak.len() != self.tiebreak.len() {
            return Err(ModelError::ShapeMismatch {
                expected: (1, self.tiebreak.len()),
                found: (1, tiebreak.len()),
            });
        }
        self.tiebreak = tiebreak;
        Ok(self)
    }

    pub fn kind(&self) -> &RuleKind {
        &self.kind
    }

    pub fn tiebreak(&self) -> &Ranking {
        &self.tiebreak
    }

    pub fn default_alt(&self) -> Option<usize> {
        match self.kind {
            RuleKind::Consensus { default } => Some(default),
            RuleKind::Lexicographic { .. } => None,
        }
    }

    pub fn is_consensus(&self) -> bool {
        matches!(self.kind, RuleKind::Consensus { .. })
    }

    pub fn apply(&self, profile: &[Ranking]) -> usize {
        self.apply_tops(profile.iter().map(Ranking::top))
    }

    /// Both rules only look at first choices.
    pub fn apply_tops(&self, tops: impl IntoIterator<Item = usize>) -> usize {
        let m = self.tiebreak.len();
        let mut seen = vec![false; m];
        let mut distinct = 0;
        let mut first = None;
        for t in tops {
            first.get_or_insert(t);
            if !seen[t] {
                seen[t] = true;
                distinct += 1;
            }
        }
        match (&self.kind, first) {
            (_, Some(t)) if distinct == 1 => t,
            (RuleKind::Consensus { default }, _) => *default,
            (RuleKind::Lexicographic { order }, _) => order
                .order()
                .iter()
                .copied()
                .find(|&a| seen[a])
                .unwrap_or_else(|| order.top()),
        }
    }

    /// Whether a voter topping `top` still lets the rule pick `target` when
    /// everyone else may top whatever helps.
    pub fn top_admits(&self, top: usize, target: usize) -> bool {
        match &self.kind {
            RuleKind::Consensus { default } => top == target || target == *default,
            RuleKind::Lexicographic { order } => order.position(top) >= order.position(target),
        }
    }
}

impl VotingRule for RuleSpec {
    fn alternatives(&self) -> usize {
        self.tiebreak.len()
    }

    fn winner(&self, profile: &[Ranking]) -> usize {
        self.apply(profile)
    }
}

/// All `m!` rankings of `m` alternatives in lexicographic order.
pub fn all_rankings(m: usize) -> Vec<Ranking> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Ranking>) {
        if prefix.len() == used.len() {
            out.push(Ranking::new(prefix.clone()).expect("built as permutation"));
            return;
        }
        for a in 0..used.len() {
            if !used[a] {
                used[a] = true;
                prefix.push(a);
                rec(prefix, used, out);
                prefix.pop();
                used[a] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

/// Every profile of `n` voters over `m` alternatives.
pub fn all_profiles(n: usize, m: usize) -> Vec<Profile> {
    let rankings = all_rankings(m);
    let mut out: Vec<Profile> = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                rankings.iter().map(move |r| {
                    let mut q = p.clone();
                    q.push(r.clone());
                    q
                })
            })
            .collect();
    }
    out
}

/// A profile on which a property fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub property: &'static str,
    pub profile: Profile,
}

/// Winner is invariant under every permutation of the voters.
pub fn check_anonymity<R: VotingRule>(rule: &R, n: usize) -> Result<(), Counterexample> {
    let perms = all_rankings(n);
    for profile in all_profiles(n, rule.alternatives()) {
        let w = rule.winner(&profile);
        for perm in &perms {
            let permuted: Profile = perm.order().iter().map(|&i| profile[i].clone()).collect();
            if rule.winner(&permuted) != w {
                return Err(Counterexample {
                    property: "anonymity",
                    profile,
                });
            }
        }
    }
    Ok(())
}

/// Moving the winner up one place in any single ranking keeps it winning.
pub fn check_monotonicity<R: VotingRule>(rule: &R, n: usize) -> Result<(), Counterexample> {
    for profile in all_profiles(n, rule.alternatives()) {
        let w = rule.winner(&profile);
        for i in 0..n {
            let pos = profile[i].position(w);
            if pos == 0 {
                continue;
            }
            let mut order = profile[i].order().to_vec();
            order.swap(pos - 1, pos);
            let mut raised = profile.clone();
            raised[i] = Ranking::new(order).expect("swap keeps a permutation");
            if rule.winner(&raised) != w {
                return Err(Counterexample {
                    property: "monotonicity",
                    profile,
                });
            }
        }
    }
    Ok(())
}

/// Exactly one in-range winner, the same on repeated evaluation.
pub fn check_resoluteness<R: VotingRule>(rule: &R, n: usize) -> Result<(), Counterexample> {
    for profile in all_profiles(n, rule.alternatives()) {
        let w = rule.winner(&profile);
        if w >= rule.alternatives() || rule.winner(&profile) != w {
            return Err(Counterexample {
                property: "resoluteness",
                profile,
            });
        }
    }
    Ok(())
}

pub fn check_amr<R: VotingRule>(rule: &R, n: usize) -> Result<(), Counterexample> {
    check_anonymity(rule, n)?;
    check_monotonicity(rule, n)?;
    check_resoluteness(rule, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(tops: &[&[usize]]) -> Profile {
        tops.iter().map(|r| Ranking::new(r.to_vec()).unwrap()).collect()
    }

    #[test]
    fn consensus_unanimous_and_default() {
        let rule = RuleSpec::consensus(2, 1).unwrap();
        assert_eq!(rule.apply(&profile(&[&[0, 1], &[0, 1]])), 0);
        assert_eq!(rule.apply(&profile(&[&[0, 1], &[1, 0]])), 1);
    }

    #[test]
    fn lexicographic_first_topped_in_order() {
        let rule = RuleSpec::lexicographic(Ranking::identity(2));
        assert_eq!(rule.apply(&profile(&[&[0, 1], &[1, 0]])), 0);
        let rule = RuleSpec::lexicographic(Ranking::new(vec![2, 1, 0]).unwrap());
        assert_eq!(rule.apply(&profile(&[&[0, 1, 2], &[1, 0, 2]])), 1);
        assert_eq!(rule.apply(&profile(&[&[0, 1, 2], &[0, 2, 1]])), 0);
    }

    #[test]
    fn top_admits_matches_apply() {
        for rule in [
            RuleSpec::consensus(3, 2).unwrap(),
            RuleSpec::lexicographic(Ranking::new(vec![1, 2, 0]).unwrap()),
        ] {
            for target in 0..3 {
                for top in 0..3 {
                    // a coalition can always top `target` itself
                    let reachable = rule.apply_tops([top, target]) == target;
                    assert_eq!(rule.top_admits(top, target), reachable, "{rule:?} {top} {target}");
                }
            }
        }
    }

    #[test]
    fn enumerations_have_expected_sizes() {
        assert_eq!(all_rankings(3).len(), 6);
        assert_eq!(all_profiles(2, 3).len(), 36);
    }

    struct Dictator;

    impl VotingRule for Dictator {
        fn alternatives(&self) -> usize {
            2
        }
        fn winner(&self, profile: &[Ranking]) -> usize {
            profile[0].top()
        }
    }

    #[test]
    fn dictator_is_not_anonymous() {
        assert!(check_anonymity(&Dictator, 2).is_err());
        assert!(check_monotonicity(&Dictator, 2).is_ok());
    }
}
