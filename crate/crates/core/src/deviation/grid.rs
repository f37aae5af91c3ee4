//! Brute-force falsifier: searches a finite lattice of transfer changes for
//! an individually rational deviation.
//!
//! Changes are `s/d` with `|s| ≤ M`. Member votes are free (they put the
//! target first), so for a fixed coalition and target the only coupling
//! between columns comes from outsiders who must end up with an admissible
//! truthful top. Once those outsiders' top-column values are fixed, every
//! column is an independent interval problem: balance to zero while keeping
//! the money silently taken from outsiders within what members were paying.
//! The search enumerates the coupling values and solves the columns exactly.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::deviation::witness::{finalize, DeviationWitness, WitnessCase};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{Instance, TransferScheme};
use crate::ranking::Ranking;
use crate::rule::RuleSpec;
use crate::scalar::Exact;
use crate::state::{State, VariantMode};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridConfig {
    /// Lattice denominator `d`.
    pub denominator: u32,
    /// Changes range over `{−M, …, M} / d`.
    pub magnitude: u32,
    pub max_coalition: usize,
    pub mode: VariantMode,
    /// Maximum number of column feasibility checks.
    pub budget: u64,
    /// Only look for deviations electing this alternative.
    pub target: Option<usize>,
}

impl GridConfig {
    pub fn new(denominator: u32, magnitude: u32, max_coalition: usize) -> Self {
        GridConfig {
            denominator,
            magnitude,
            max_coalition,
            mode: VariantMode::Standard,
            budget: 50_000_000,
            target: None,
        }
    }

    pub fn with_mode(mut self, mode: VariantMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_target(mut self, target: Option<usize>) -> Self {
        self.target = target;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GridOutcome<S> {
    Found(Box<DeviationWitness<S>>),
    /// The whole lattice was searched.
    NoDeviation {
        checks: u64,
    },
    BudgetExhausted {
        checks: u64,
    },
}

impl<S> GridOutcome<S> {
    pub fn witness(&self) -> Option<&DeviationWitness<S>> {
        match self {
            GridOutcome::Found(w) => Some(w),
            _ => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, GridOutcome::Found(_))
    }
}

pub fn grid_search<S: Exact>(
    instance: &Instance<S>,
    rule: &RuleSpec,
    state: &State<S>,
    config: &GridConfig,
) -> Result<GridOutcome<S>> {
    state.check_shape(instance, rule)?;
    if config.denominator == 0 {
        return Err(Error::Precondition("grid denominator must be positive".into()));
    }
    if let Some(t) = config.target {
        instance.check_alt(t)?;
    }
    let lattice = Lattice::new(instance, state, config.denominator)?;
    let mut search = Search {
        rule,
        config,
        lattice: &lattice,
        previous: &state.profile,
        n: instance.agents(),
        m: instance.alternatives(),
        winner: state.winner(rule),
        checks: 0,
    };
    let targets: Vec<usize> = match config.target {
        Some(t) => vec![t],
        None => (0..search.m).collect(),
    };
    for size in 1..=config.max_coalition.min(search.n) {
        for coalition in combinations(search.n, size) {
            for &target in &targets {
                match search.coalition_target(&coalition, target) {
                    Ok(None) => {}
                    Ok(Some(values)) => {
                        let to = search.materialize(instance, &coalition, target, &values);
                        return finalize(instance, state, rule, rule, to, config.mode, WitnessCase::Grid, None)
                            .map(|w| GridOutcome::Found(Box::new(w)));
                    }
                    Err(Halt) => return Ok(GridOutcome::BudgetExhausted { checks: search.checks }),
                }
            }
        }
    }
    Ok(GridOutcome::NoDeviation { checks: search.checks })
}

/// Utilities and transfers scaled to integers, with the grid step in the same units.
struct Lattice {
    scale: BigInt,
    step: i128,
    utility: Vec<Vec<i128>>,
    tau: Vec<Vec<i128>>,
}

impl Lattice {
    fn new<S: Exact>(instance: &Instance<S>, state: &State<S>, d: u32) -> Result<Self> {
        let (n, m) = (instance.agents(), instance.alternatives());
        let u = state.utilities(instance);
        let big_u: Vec<Vec<BigRational>> = (0..n).map(|i| (0..m).map(|a| u[(i, a)].to_big()).collect()).collect();
        let big_t: Vec<Vec<BigRational>> = (0..n)
            .map(|i| (0..m).map(|a| state.tau.get(i, a).to_big()).collect())
            .collect();
        let mut scale = BigInt::from(d);
        for v in big_u.iter().chain(&big_t).flatten() {
            scale = scale.lcm(v.denom());
        }
        let to_int = |v: &BigRational| -> Result<i128> {
            (v * BigRational::from_integer(scale.clone()))
                .to_integer()
                .to_i128()
                .ok_or_else(|| Error::Precondition("grid lattice exceeds the 128-bit range".into()))
        };
        let conv = |rows: &Vec<Vec<BigRational>>| -> Result<Vec<Vec<i128>>> {
            rows.iter().map(|r| r.iter().map(to_int).collect()).collect()
        };
        let step = (&scale / BigInt::from(d))
            .to_i128()
            .ok_or_else(|| Error::Precondition("grid lattice exceeds the 128-bit range".into()))?;
        Ok(Lattice {
            utility: conv(&big_u)?,
            tau: conv(&big_t)?,
            scale,
            step,
        })
    }
}

struct Halt;

type Bounds = Vec<Vec<(i128, i128)>>;

struct Search<'a> {
    rule: &'a RuleSpec,
    config: &'a GridConfig,
    lattice: &'a Lattice,
    previous: &'a [Ranking],
    n: usize,
    m: usize,
    winner: usize,
    checks: u64,
}

impl Search<'_> {
    fn bound(&self) -> i128 {
        i128::from(self.config.magnitude)
    }

    fn tick(&mut self) -> Result<(), Halt> {
        self.checks += 1;
        if self.checks > self.config.budget {
            Err(Halt)
        } else {
            Ok(())
        }
    }

    /// Feasible change values (in grid steps) for this coalition and target, if any.
    fn coalition_target(&mut self, coalition: &[usize], target: usize) -> Result<Option<Vec<Vec<i128>>>, Halt> {
        let (n, m, bound, step) = (self.n, self.m, self.bound(), self.lattice.step);
        let member: Vec<bool> = (0..n).map(|i| coalition.contains(&i)).collect();
        let outsiders: Vec<usize> = (0..n).filter(|&i| !member[i]).collect();

        // Outsiders that must end up with one of the admissible tops.
        let constrained: Vec<(usize, Vec<usize>)> = if self.config.mode == VariantMode::Sticky {
            let tops = (0..n).map(|i| if member[i] { target } else { self.previous[i].top() });
            if self.rule.apply_tops(tops) != target {
                return Ok(None);
            }
            Vec::new()
        } else {
            outsiders
                .iter()
                .filter_map(|&k| {
                    let admitted: Vec<usize> = (0..m).filter(|&t| self.rule.top_admits(t, target)).collect();
                    (admitted.len() < m).then_some((k, admitted))
                })
                .collect()
        };

        let caps: Vec<Option<i128>> = (0..m)
            .map(|a| {
                (self.config.mode != VariantMode::Anonymous).then(|| {
                    let paid: i128 = coalition.iter().map(|&j| (-self.lattice.tau[j][a]).max(0)).sum();
                    paid.div_euclid(step)
                })
            })
            .collect();

        let mut base: Bounds = vec![vec![(-bound, bound); m]; n];
        for &k in &outsiders {
            for (cell, &t) in base[k].iter_mut().zip(&self.lattice.tau[k]) {
                let lo = if t <= 0 { 0 } else { ceil_div(-t, step) };
                cell.0 = lo.max(-bound);
            }
        }

        for &strict in coalition {
            let mut bounds = base.clone();
            let mut ok = true;
            for &i in coalition {
                let need = self.lattice.utility[i][self.winner] - self.lattice.utility[i][target];
                let lo = if i == strict {
                    need.div_euclid(step) + 1
                } else {
                    ceil_div(need, step)
                };
                let cell = &mut bounds[i][target];
                cell.0 = cell.0.max(lo);
                ok &= cell.0 <= cell.1;
            }
            if !ok {
                continue;
            }
            let mut choice = vec![0usize; constrained.len()];
            loop {
                let assign: Vec<(usize, usize)> = constrained
                    .iter()
                    .zip(&choice)
                    .map(|((k, admitted), &c)| (*k, admitted[c]))
                    .collect();
                if let Some(v) = self.fix_tops(&bounds, &member, &caps, &assign, 0)? {
                    return Ok(Some(v));
                }
                if !advance(&mut choice, constrained.iter().map(|(_, a)| a.len())) {
                    break;
                }
            }
        }
        Ok(None)
    }

    /// Fixes outsider `assign[idx]`'s value at its chosen top and recurses.
    /// The last outsider is scanned downward: its own top column accepts an
    /// interval of values and every other column only gets easier as the
    /// value grows, so the largest accepted value decides.
    fn fix_tops(
        &mut self,
        bounds: &Bounds,
        member: &[bool],
        caps: &[Option<i128>],
        assign: &[(usize, usize)],
        idx: usize,
    ) -> Result<Option<Vec<Vec<i128>>>, Halt> {
        if assign.is_empty() {
            return self.solve_all(bounds, member, caps);
        }
        let (k, t) = assign[idx];
        let last = idx + 1 == assign.len();
        let (lo, hi) = bounds[k][t];
        let mut v = hi;
        while v >= lo {
            let Some(row) = self.top_row(bounds, k, t, v) else {
                // lowering v only tightens the other columns
                break;
            };
            let mut next = bounds.clone();
            next[k] = row;
            if last {
                self.tick()?;
                if column_ok(&next, member, caps, t) {
                    return self.solve_all(&next, member, caps);
                }
            } else if let Some(found) = self.fix_tops(&next, member, caps, assign, idx + 1)? {
                return Ok(Some(found));
            }
            v -= 1;
        }
        Ok(None)
    }

    /// Outsider `k`'s bounds when it keeps `t` on top with value `v` there.
    fn top_row(&self, bounds: &Bounds, k: usize, t: usize, v: i128) -> Option<Vec<(i128, i128)>> {
        let step = self.lattice.step;
        let pos = self.rule.tiebreak();
        let mut row = bounds[k].clone();
        row[t] = (v, v);
        for a in (0..self.m).filter(|&a| a != t) {
            let diff = self.lattice.utility[k][a] - self.lattice.utility[k][t];
            let gap = if pos.position(t) < pos.position(a) {
                ceil_div(diff, step)
            } else {
                diff.div_euclid(step) + 1
            };
            row[a].1 = row[a].1.min(v - gap);
            if row[a].0 > row[a].1 {
                return None;
            }
        }
        Some(row)
    }

    fn solve_all(
        &mut self,
        bounds: &Bounds,
        member: &[bool],
        caps: &[Option<i128>],
    ) -> Result<Option<Vec<Vec<i128>>>, Halt> {
        for a in 0..self.m {
            self.tick()?;
            if !column_ok(bounds, member, caps, a) {
                return Ok(None);
            }
        }
        let mut values = vec![vec![0i128; self.m]; self.n];
        for a in 0..self.m {
            for (row, v) in values.iter_mut().zip(column_values(bounds, member, a)) {
                row[a] = v;
            }
        }
        Ok(Some(values))
    }

    fn materialize<S: Exact>(
        &self,
        instance: &Instance<S>,
        coalition: &[usize],
        target: usize,
        values: &[Vec<i128>],
    ) -> State<S> {
        let (n, m) = (self.n, self.m);
        let unit = BigRational::new(BigInt::from(self.lattice.step), self.lattice.scale.clone());
        let mut tau = Matrix::zeros(n, m);
        for i in 0..n {
            for a in 0..m {
                let old = BigRational::new(BigInt::from(self.lattice.tau[i][a]), self.lattice.scale.clone());
                let new = old + &unit * BigInt::from(values[i][a]);
                tau[(i, a)] = S::from_big(&new).expect("grid values fit the scalar");
            }
        }
        let tau = TransferScheme::from_matrix_unchecked(tau);
        let u2 = crate::model::effective_utilities(instance, &tau).expect("shape checked");
        let profile = (0..n)
            .map(|i| {
                let truthful = Ranking::by_utility(u2.row(i), self.rule.tiebreak());
                if coalition.contains(&i) {
                    truthful.with_top(target)
                } else if self.config.mode == VariantMode::Sticky {
                    self.previous[i].clone()
                } else {
                    truthful
                }
            })
            .collect();
        State::new(profile, tau, coalition.iter().copied().collect())
    }
}

fn ceil_div(a: i128, b: i128) -> i128 {
    -(-a).div_euclid(b)
}

/// Can column `a` balance to zero while the amount taken from outsiders stays
/// within the cap? Members give way first, then outsiders' gains, and only
/// then do outsiders lose money.
fn column_ok(bounds: &Bounds, member: &[bool], caps: &[Option<i128>], a: usize) -> bool {
    let (mut sum_lo, mut sum_hi, mut forced, mut slack) = (0i128, 0i128, 0i128, 0i128);
    for (i, row) in bounds.iter().enumerate() {
        let (lo, hi) = row[a];
        if lo > hi {
            return false;
        }
        sum_lo += lo;
        sum_hi += hi;
        if member[i] {
            slack += hi - lo;
        } else {
            forced += (-hi).max(0);
            if hi > 0 {
                slack += hi - lo.max(0);
            }
        }
    }
    if sum_lo > 0 || sum_hi < 0 {
        return false;
    }
    caps[a].is_none_or(|cap| forced + (sum_hi - slack).max(0) <= cap)
}

/// Concrete values for a column that passed [`column_ok`]: every entry starts
/// at the change nearest zero, then members absorb the imbalance first and
/// outsiders only lose money when nothing else is left.
fn column_values(bounds: &Bounds, member: &[bool], a: usize) -> Vec<i128> {
    let mut values: Vec<i128> = bounds.iter().map(|row| 0i128.clamp(row[a].0, row[a].1)).collect();
    let mut excess: i128 = values.iter().sum();
    if excess < 0 {
        let order = (0..values.len())
            .filter(|&i| member[i])
            .chain((0..values.len()).filter(|&i| !member[i]));
        for i in order {
            let raise = (-excess).min(bounds[i][a].1 - values[i]);
            values[i] += raise;
            excess += raise;
        }
    }
    let floors: [&dyn Fn(usize) -> Option<i128>; 3] = [
        &|i| member[i].then_some(bounds[i][a].0),
        &|i| (!member[i]).then_some(bounds[i][a].0.max(0)),
        &|i| (!member[i]).then_some(bounds[i][a].0),
    ];
    for floor in floors {
        for (i, v) in values.iter_mut().enumerate() {
            if let Some(f) = floor(i) {
                let cut = excess.min((*v - f).max(0));
                *v -= cut;
                excess -= cut;
            }
        }
    }
    debug_assert_eq!(excess, 0);
    values
}

/// Odometer over `choice` with the given radices; false once it wraps.
fn advance(choice: &mut [usize], radices: impl Iterator<Item = usize>) -> bool {
    for (c, r) in choice.iter_mut().zip(radices) {
        *c += 1;
        if *c < r {
            return true;
        }
        *c = 0;
    }
    false
}

/// `size`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..size).collect();
    if size > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(pos) = (0..size).rev().find(|&p| cur[p] < n - size + p) else {
            return out;
        };
        cur[pos] += 1;
        for p in pos + 1..size {
            cur[p] = cur[p - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::construct_ir_sne;
    use crate::{Rational, Scalar};

    fn q(v: i64) -> Rational {
        Rational::from_int(v)
    }

    fn inst(rows: &[&[i64]]) -> Instance<Rational> {
        Instance::from_rows(rows.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect()).unwrap()
    }

    fn example() -> Instance<Rational> {
        inst(&[&[2, 4], &[1, 1], &[2, 3], &[1, 2], &[11, 3]])
    }

    #[test]
    fn subsets_in_order() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(combinations(2, 3), Vec::<Vec<usize>>::new());
    }

    #[test]
    fn constructed_example_survives_the_grid() {
        let i = example();
        let rule = RuleSpec::consensus(2, 1).unwrap();
        let s = construct_ir_sne(&i, 1).unwrap();
        let out = grid_search(&i, &rule, &s, &GridConfig::new(2, 8, 5)).unwrap();
        assert!(matches!(out, GridOutcome::NoDeviation { .. }), "{out:?}");
    }

    #[test]
    fn truthful_example_is_beaten() {
        let i = example();
        let rule = RuleSpec::consensus(2, 1).unwrap();
        let s = State::truthful(&i, &rule);
        let out = grid_search(&i, &rule, &s, &GridConfig::new(2, 8, 5)).unwrap();
        let w = out.witness().expect("a deviation exists");
        assert_eq!(w.winner(), 0);
        assert!(w.to_state.tau.is_budget_balanced());
    }

    #[test]
    fn tiny_budget_is_reported() {
        let i = example();
        let rule = RuleSpec::consensus(2, 1).unwrap();
        let s = construct_ir_sne(&i, 1).unwrap();
        let out = grid_search(&i, &rule, &s, &GridConfig::new(2, 22, 5).with_budget(3)).unwrap();
        assert!(matches!(out, GridOutcome::BudgetExhausted { .. }));
    }

    #[test]
    fn strict_slack_is_found() {
        let i = inst(&[&[5, 0], &[0, 1]]);
        let rule = RuleSpec::consensus(2, 1).unwrap();
        let tau = TransferScheme::from_rows(vec![vec![q(-2), q(0)], vec![q(2), q(0)]]).unwrap();
        let s = State::new(vec![Ranking::identity(2); 2], tau, [0, 1].into_iter().collect());
        let out = grid_search(&i, &rule, &s, &GridConfig::new(2, 10, 2)).unwrap();
        assert!(out.is_found());
    }
}
