//! One function per subcommand. Each returns the report, its exit code and a
//! one-line summary; printing is left to the caller.

use std::path::Path;

use sne_core::{
    construct, construct_ra_deviation, grid_magnitude, grid_search, ra_reports, run_dynamics, verify_ir_sne,
    DeviationSource, DynamicsConfig, GridConfig, GridOutcome, Instance, Rational, Reason, RuleSpec, State, Terminal,
    VariantMode,
};

use crate::error::CliError;
use crate::files::{read_json, CandidatesFile, InstanceFile, StateFile};
use crate::report::*;

/// How much a report carries beyond the essentials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Verbosity {
    /// No summary on standard error.
    Quiet,
    #[default]
    Normal,
    /// Adds effective utilities and per-target reports.
    Full,
}

impl Verbosity {
    pub const ENV: &'static str = "SNE_VERBOSITY";

    pub fn parse(value: &str) -> Result<Self, CliError> {
        match value {
            "quiet" => Ok(Verbosity::Quiet),
            "normal" | "" => Ok(Verbosity::Normal),
            "full" => Ok(Verbosity::Full),
            other => Err(CliError::Usage(format!(
                "{}={other} is not one of quiet, normal, full",
                Self::ENV
            ))),
        }
    }

    pub fn from_env() -> Result<Self, CliError> {
        std::env::var(Self::ENV).map_or(Ok(Verbosity::Normal), |v| Self::parse(&v))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub report: Report,
    pub exit: u8,
    pub summary: String,
}

/// Grid flags as given on the command line; unset values get defaults from the instance.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GridOptions {
    pub denominator: Option<u32>,
    pub magnitude: Option<u32>,
    pub coalition_cap: Option<usize>,
    pub budget: Option<u64>,
    /// 1-based.
    pub target_alt: Option<usize>,
}

impl GridOptions {
    fn is_set(&self) -> bool {
        self.denominator.is_some() || self.magnitude.is_some() || self.coalition_cap.is_some() || self.budget.is_some()
    }

    fn resolve(&self, instance: &Instance<Rational>, mode: VariantMode) -> Result<GridConfig, CliError> {
        let n = instance.agents();
        let d = self.denominator.unwrap_or(2);
        if d == 0 {
            return Err(CliError::Usage("--denominator must be positive".into()));
        }
        let cap = self.coalition_cap.unwrap_or(n);
        if cap == 0 || cap > n {
            return Err(CliError::Usage(format!("--coalition-cap must lie in 1..={n}")));
        }
        let mut config =
            GridConfig::new(d, self.magnitude.unwrap_or_else(|| grid_magnitude(instance)), cap).with_mode(mode);
        if let Some(b) = self.budget {
            config = config.with_budget(b);
        }
        if let Some(t) = self.target_alt {
            config = config.with_target(Some(alt_index(t, instance.alternatives())?));
        }
        Ok(config)
    }
}

fn alt_index(one_based: usize, m: usize) -> Result<usize, CliError> {
    if (1..=m).contains(&one_based) {
        Ok(one_based - 1)
    } else {
        Err(CliError::Usage(format!(
            "alternative {one_based} is out of range 1..={m}"
        )))
    }
}

fn load_instance(path: &Path) -> Result<(Instance<Rational>, RuleSpec), CliError> {
    read_json::<InstanceFile>(path)?.load()
}

fn load_state(path: &Path, instance: &Instance<Rational>) -> Result<State<Rational>, CliError> {
    read_json::<StateFile>(path)?.load(instance.agents(), instance.alternatives())
}

fn require_consensus(rule: &RuleSpec) -> Result<(), CliError> {
    if rule.is_consensus() {
        Ok(())
    } else {
        Err(CliError::Unsupported("this command needs a consensus rule".into()))
    }
}

fn verdict_exit(reason: &Reason) -> u8 {
    match reason {
        Reason::Stable => 0,
        Reason::StateInconsistent(_) => 4,
        _ => 1,
    }
}

pub fn cmd_construct(instance_path: &Path, default: Option<usize>) -> Result<Outcome, CliError> {
    let (instance, rule) = load_instance(instance_path)?;
    require_consensus(&rule)?;
    let rule = match default {
        Some(d) => {
            let tiebreak = rule.tiebreak().clone();
            RuleSpec::consensus(instance.alternatives(), alt_index(d, instance.alternatives())?)
                .and_then(|r| r.with_tiebreak(tiebreak))
                .expect("index checked")
        }
        None => rule,
    };
    cmd_construct_loaded(&instance, &rule)
}

/// Construction and confirmation for an already loaded instance.
pub fn cmd_construct_loaded(instance: &Instance<Rational>, rule: &RuleSpec) -> Result<Outcome, CliError> {
    require_consensus(rule)?;
    let c = construct(instance, rule)?;
    let verdict = verify_ir_sne(instance, rule, &c.state)?;
    let exit = verdict_exit(&verdict.reason);
    let summary = format!(
        "constructed state electing alternative {} with coalition {:?}; verifier: {}",
        c.winner + 1,
        c.state.coalition.iter().map(|i| i + 1).collect::<Vec<_>>(),
        verdict.reason.tag()
    );
    Ok(Outcome {
        report: Report::Construct(ConstructReport {
            schema: schema(),
            default: rule.default_alt().expect("consensus") + 1,
            winner: c.winner + 1,
            welfare_order: c.order.iter().map(|a| a + 1).collect(),
            state: StateFile::from_core(&c.state),
            verdict: verdict_out(&verdict),
        }),
        exit,
        summary,
    })
}

pub fn cmd_verify(instance_path: &Path, state_path: &Path, verbosity: Verbosity) -> Result<Outcome, CliError> {
    let (instance, rule) = load_instance(instance_path)?;
    require_consensus(&rule)?;
    let state = load_state(state_path, &instance)?;
    let verdict = verify_ir_sne(&instance, &rule, &state)?;
    let out = verdict_out(&verdict);
    let summary = if verdict.stable {
        "stable".to_string()
    } else {
        let w = match &verdict.witness {
            Some(w) => format!("; {} witness elects alternative {}", w.case, w.winner() + 1),
            None => String::new(),
        };
        format!("unstable: {}{w}", out.detail)
    };
    Ok(Outcome {
        exit: verdict_exit(&verdict.reason),
        report: Report::Verify(VerifyReport {
            schema: schema(),
            winner: state.winner(&rule) + 1,
            verdict: out,
            utilities: (verbosity == Verbosity::Full).then(|| utilities_out(&instance, &state)),
        }),
        summary,
    })
}

pub fn cmd_devsearch(
    instance_path: &Path,
    state_path: &Path,
    mode: VariantMode,
    grid: &GridOptions,
) -> Result<Outcome, CliError> {
    let (instance, rule) = load_instance(instance_path)?;
    let state = load_state(state_path, &instance)?;
    let config = grid.resolve(&instance, mode)?;
    let grid_out = GridOut {
        denominator: config.denominator,
        magnitude: config.magnitude,
        coalition_cap: config.max_coalition,
        mode: mode_name(mode).to_string(),
        budget: config.budget,
        target_alt: config.target.map(|t| t + 1),
    };
    let (outcome, checks, witness, exit, summary) = match grid_search(&instance, &rule, &state, &config)? {
        GridOutcome::Found(w) => {
            let summary = format!(
                "deviation by coalition {:?} elects alternative {}",
                w.to_state.coalition.iter().map(|i| i + 1).collect::<Vec<_>>(),
                w.winner() + 1
            );
            ("witness-found", 0, Some(witness_out(&w)), 1, summary)
        }
        GridOutcome::NoDeviation { checks } => (
            "none-found",
            checks,
            None,
            0,
            format!("no deviation on the grid ({checks} column checks)"),
        ),
        GridOutcome::BudgetExhausted { checks } => (
            "budget-exhausted",
            checks,
            None,
            5,
            format!("budget exhausted after {checks} column checks"),
        ),
    };
    Ok(Outcome {
        report: Report::Devsearch(DevsearchReport {
            schema: schema(),
            outcome: outcome.to_string(),
            checks,
            grid: grid_out,
            witness,
        }),
        exit,
        summary,
    })
}

pub fn cmd_rafilter(
    instance_path: &Path,
    state_path: &Path,
    target_alt: Option<usize>,
    verbosity: Verbosity,
) -> Result<Outcome, CliError> {
    let (instance, rule) = load_instance(instance_path)?;
    let state = load_state(state_path, &instance)?;
    let m = instance.alternatives();
    let b = state.winner(&rule);
    let alts: Vec<usize> = match target_alt {
        Some(t) => {
            let a = alt_index(t, m)?;
            if a == b {
                return Err(CliError::Usage(format!("alternative {t} already wins")));
            }
            vec![a]
        }
        None => (0..m).filter(|&a| a != b).collect(),
    };
    let mut candidates = Vec::new();
    let mut passing = 0;
    for alt in alts {
        let reports = ra_reports(&instance, &rule, &state, alt)?;
        let best = reports
            .iter()
            .reduce(|best, r| if r.margin() > best.margin() { r } else { best })
            .expect("at least one agent");
        let witness = if best.passes {
            passing += 1;
            construct_ra_deviation(&instance, &rule, &state, best)
                .ok()
                .map(|w| witness_out(&w))
        } else {
            None
        };
        candidates.push(RaCandidate {
            alternative: alt + 1,
            best: ra_out(best),
            reports: (verbosity == Verbosity::Full).then(|| reports.iter().map(ra_out).collect()),
            witness,
        });
    }
    let summary = if passing == 0 {
        format!(
            "no candidate passes the reallocation test ({} checked)",
            candidates.len()
        )
    } else {
        format!(
            "{passing} of {} candidates pass the reallocation test",
            candidates.len()
        )
    };
    Ok(Outcome {
        report: Report::Rafilter(RafilterReport {
            schema: schema(),
            winner: b + 1,
            candidates,
        }),
        exit: u8::from(passing > 0),
        summary,
    })
}

pub struct DynamicsOptions<'a> {
    pub start: Option<&'a Path>,
    pub candidates: Option<&'a Path>,
    pub mode: VariantMode,
    pub max_steps: usize,
    pub grid: GridOptions,
}

pub fn cmd_dynamics(instance_path: &Path, options: &DynamicsOptions<'_>) -> Result<Outcome, CliError> {
    let (instance, rule) = load_instance(instance_path)?;
    let start = match options.start {
        Some(p) => load_state(p, &instance)?,
        None => State::truthful(&instance, &rule),
    };
    let source = match options.candidates {
        Some(p) => {
            if options.grid.is_set() || options.grid.target_alt.is_some() {
                return Err(CliError::Usage(
                    "grid flags cannot be combined with --candidates".into(),
                ));
            }
            DeviationSource::Candidates(
                read_json::<CandidatesFile>(p)?.load(instance.agents(), instance.alternatives())?,
            )
        }
        None => DeviationSource::Grid(options.grid.resolve(&instance, options.mode)?),
    };
    let config = DynamicsConfig {
        max_steps: options.max_steps,
        source,
    };
    let trace = run_dynamics(&instance, &rule, options.mode, start, &config)?;
    let winners: Vec<usize> = trace.winners(&rule).iter().map(|w| w + 1).collect();
    let (cycle_start, period) = match trace.terminal {
        Terminal::Cycle { start, period } => (Some(start), Some(period)),
        _ => (None, None),
    };
    let exit = match trace.terminal {
        Terminal::Fixpoint => 0,
        Terminal::Cycle { .. } => 1,
        Terminal::StepsExhausted | Terminal::SearchExhausted => 5,
    };
    let summary = format!(
        "{} after {} steps; winners {:?}",
        trace.terminal,
        trace.steps.len(),
        winners
    );
    Ok(Outcome {
        report: Report::Dynamics(DynamicsReport {
            schema: schema(),
            mode: mode_name(options.mode).to_string(),
            terminal: trace.terminal.tag().to_string(),
            cycle_start,
            period,
            steps: trace.steps.len(),
            winners,
            movers: trace
                .steps
                .iter()
                .map(|w| w.to_state.coalition.iter().map(|i| i + 1).collect())
                .collect(),
            states: trace.states.iter().map(StateFile::from_core).collect(),
        }),
        exit,
        summary,
    })
}
