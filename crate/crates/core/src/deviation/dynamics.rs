//! Iterated deviations: keep applying the first available deviation until
//! nothing improves, a state repeats, or the step budget runs out.

use std::collections::HashMap;
use std::fmt;

use crate::deviation::grid::{grid_search, GridConfig, GridOutcome};
use crate::deviation::witness::{finalize, DeviationWitness, WitnessCase};
use crate::error::{Error, Result};
use crate::model::{effective_utilities, Instance, TransferScheme};
use crate::ranking::{Profile, Ranking};
use crate::rule::RuleSpec;
use crate::scalar::Exact;
use crate::state::{is_ir_deviation, State, VariantMode};

/// Where the next deviation comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeviationSource<S> {
    /// First witness of the grid falsifier (its mode is overridden by the run's mode).
    Grid(GridConfig),
    /// A fixed menu of transfer schemes, tried in rotation starting after the
    /// one currently in force. Each is paired with the smallest coalition
    /// and lowest target that make it an IR deviation.
    Candidates(Vec<TransferScheme<S>>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DynamicsConfig<S> {
    pub max_steps: usize,
    pub source: DeviationSource<S>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Terminal {
    /// No deviation was found from the last state.
    Fixpoint,
    /// State `start` reappeared after `period` steps.
    Cycle {
        start: usize,
        period: usize,
    },
    StepsExhausted,
    /// The grid ran out of budget before deciding the last state.
    SearchExhausted,
}

impl Terminal {
    pub fn tag(self) -> &'static str {
        match self {
            Terminal::Fixpoint => "fixpoint",
            Terminal::Cycle { .. } => "cycle",
            Terminal::StepsExhausted => "steps-exhausted",
            Terminal::SearchExhausted => "search-exhausted",
        }
    }
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Terminal::Cycle { start, period } => write!(f, "cycle (from state {start}, period {period})"),
            other => f.write_str(other.tag()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DynamicsTrace<S> {
    /// `states[0]` is the start; `states[k + 1]` is `steps[k].to_state`.
    pub states: Vec<State<S>>,
    pub steps: Vec<DeviationWitness<S>>,
    pub terminal: Terminal,
}

impl<S: Exact> DynamicsTrace<S> {
    pub fn winners(&self, rule: &RuleSpec) -> Vec<usize> {
        self.states.iter().map(|s| s.winner(rule)).collect()
    }
}

/// Repetition is judged on votes and transfers only; the coalition just
/// records who made the last move.
pub fn run_dynamics<S: Exact>(
    instance: &Instance<S>,
    rule: &RuleSpec,
    mode: VariantMode,
    start: State<S>,
    config: &DynamicsConfig<S>,
) -> Result<DynamicsTrace<S>> {
    start.check_shape(instance, rule)?;
    if let DeviationSource::Candidates(list) = &config.source {
        for t in list {
            if (t.agents(), t.alternatives()) != (instance.agents(), instance.alternatives()) {
                return Err(crate::error::ModelError::ShapeMismatch {
                    expected: (instance.agents(), instance.alternatives()),
                    found: (t.agents(), t.alternatives()),
                }
                .into());
            }
        }
    }
    let mut seen: HashMap<(Profile, TransferScheme<S>), usize> = HashMap::new();
    seen.insert((start.profile.clone(), start.tau.clone()), 0);
    let mut trace = DynamicsTrace {
        states: vec![start],
        steps: Vec::new(),
        terminal: Terminal::StepsExhausted,
    };
    for _ in 0..config.max_steps {
        let current = trace.states.last().expect("start state");
        let next = match &config.source {
            DeviationSource::Grid(grid) => {
                let grid = GridConfig { mode, ..grid.clone() };
                match grid_search(instance, rule, current, &grid)? {
                    GridOutcome::Found(w) => Some(*w),
                    GridOutcome::NoDeviation { .. } => None,
                    GridOutcome::BudgetExhausted { .. } => {
                        trace.terminal = Terminal::SearchExhausted;
                        return Ok(trace);
                    }
                }
            }
            DeviationSource::Candidates(list) => candidate_step(instance, rule, mode, current, list)?,
        };
        let Some(w) = next else {
            trace.terminal = Terminal::Fixpoint;
            return Ok(trace);
        };
        let key = (w.to_state.profile.clone(), w.to_state.tau.clone());
        trace.states.push(w.to_state.clone());
        trace.steps.push(w);
        let index = trace.states.len() - 1;
        if let Some(&start) = seen.get(&key) {
            trace.terminal = Terminal::Cycle {
                start,
                period: index - start,
            };
            return Ok(trace);
        }
        seen.insert(key, index);
    }
    Ok(trace)
}

/// First IR deviation to one of `candidates`, scanning them in rotation after
/// the scheme currently in force.
pub fn candidate_step<S: Exact>(
    instance: &Instance<S>,
    rule: &RuleSpec,
    mode: VariantMode,
    from: &State<S>,
    candidates: &[TransferScheme<S>],
) -> Result<Option<DeviationWitness<S>>> {
    let len = candidates.len();
    let offset = candidates.iter().position(|t| *t == from.tau).map_or(0, |p| p + 1);
    let (n, m) = (instance.agents(), instance.alternatives());
    for k in 0..len {
        let tau = &candidates[(offset + k) % len];
        let u2 = effective_utilities(instance, tau)?;
        for size in 1..=n {
            for coalition in super::grid::combinations(n, size) {
                for target in 0..m {
                    let profile: Profile = (0..n)
                        .map(|i| {
                            let truthful = Ranking::by_utility(u2.row(i), rule.tiebreak());
                            if coalition.contains(&i) {
                                truthful.with_top(target)
                            } else if mode == VariantMode::Sticky {
                                from.profile[i].clone()
                            } else {
                                truthful
                            }
                        })
                        .collect();
                    if rule.apply(&profile) != target {
                        continue;
                    }
                    let to = State::new(profile, tau.clone(), coalition.iter().copied().collect());
                    match is_ir_deviation(instance, rule, from, &to, mode) {
                        Ok(true) => {
                            return finalize(instance, from, rule, rule, to, mode, WitnessCase::Grid, None).map(Some)
                        }
                        Ok(false) | Err(Error::Inconsistent(_)) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Rational, Scalar};

    fn q(v: i64) -> Rational {
        Rational::from_int(v)
    }

    fn half(v: i64) -> Rational {
        Rational::new(v.into(), 2.into())
    }

    fn inst(rows: Vec<Vec<Rational>>) -> Instance<Rational> {
        Instance::from_rows(rows).unwrap()
    }

    /// Three agents, two alternatives, default 1; agent 2 values alternative 0 at 3 + 1/2.
    fn anonymous_cycle() -> (Instance<Rational>, RuleSpec, Vec<TransferScheme<Rational>>) {
        let i = inst(vec![vec![q(1), q(1)], vec![q(1), q(2)], vec![half(7), q(1)]]);
        let rule = RuleSpec::consensus(2, 1).unwrap();
        let scheme = |rows: [[Rational; 2]; 3]| TransferScheme::from_rows(rows.map(Vec::from).to_vec()).unwrap();
        let states = vec![
            scheme([[q(0), q(-1)], [q(1), q(0)], [q(-1), q(1)]]),
            scheme([[q(0), q(-1)], [q(1), q(1)], [q(-1), q(0)]]),
            scheme([[q(0), q(-1)], [half(5), q(1)], [half(-5), q(0)]]),
            scheme([[q(0), q(-1)], [half(5), q(0)], [half(-5), q(1)]]),
        ];
        (i, rule, states)
    }

    #[test]
    fn anonymous_recipients_cycle_through_four_states() {
        let (i, rule, states) = anonymous_cycle();
        let u = effective_utilities(&i, &states[0]).unwrap();
        let profile = (0..3)
            .map(|k| Ranking::by_utility(u.row(k), rule.tiebreak()).with_top(0))
            .collect();
        let start = State::new(profile, states[0].clone(), (0..3).collect());
        let config = DynamicsConfig {
            max_steps: 20,
            source: DeviationSource::Candidates(states.clone()),
        };
        let trace = run_dynamics(&i, &rule, VariantMode::Anonymous, start, &config).unwrap();
        assert_eq!(trace.terminal, Terminal::Cycle { start: 0, period: 4 });
        assert_eq!(trace.winners(&rule), vec![0, 1, 0, 1, 0]);
        let taus: Vec<_> = trace.states.iter().map(|s| s.tau.clone()).collect();
        assert_eq!(taus[..4], states[..]);
    }

    #[test]
    fn standard_semantics_block_the_first_anonymous_move() {
        let (i, rule, states) = anonymous_cycle();
        let u = effective_utilities(&i, &states[0]).unwrap();
        let profile = (0..3)
            .map(|k| Ranking::by_utility(u.row(k), rule.tiebreak()).with_top(0))
            .collect();
        let start = State::new(profile, states[0].clone(), (0..3).collect());
        let step = candidate_step(&i, &rule, VariantMode::Standard, &start, &states[1..2]).unwrap();
        assert!(step.is_none());
    }

    #[test]
    fn sticky_outsiders_never_settle() {
        let i = inst(vec![vec![q(3), q(0)], vec![q(0), q(1)]]);
        let rule = RuleSpec::consensus(2, 1).unwrap();
        let start = State::truthful(&i, &rule);
        let config = DynamicsConfig {
            max_steps: 50,
            source: DeviationSource::Grid(GridConfig::new(2, 6, 2)),
        };
        let trace = run_dynamics(&i, &rule, VariantMode::Sticky, start, &config).unwrap();
        assert!(matches!(trace.terminal, Terminal::Cycle { .. }), "{:?}", trace.terminal);
    }

    #[test]
    fn standard_dynamics_settle_on_the_worked_example() {
        let i = inst(
            [[2, 4], [1, 1], [2, 3], [1, 2], [11, 3]]
                .iter()
                .map(|r| r.iter().map(|&v| q(v)).collect())
                .collect(),
        );
        let rule = RuleSpec::consensus(2, 1).unwrap();
        let config = DynamicsConfig {
            max_steps: 20,
            source: DeviationSource::Grid(GridConfig::new(2, 8, 5)),
        };
        let trace = run_dynamics(&i, &rule, VariantMode::Standard, State::truthful(&i, &rule), &config).unwrap();
        assert_eq!(trace.terminal, Terminal::Fixpoint);
        let last = trace.states.last().unwrap();
        assert!(crate::equilibrium::verify_ir_sne(&i, &rule, last).unwrap().stable);
    }
}
