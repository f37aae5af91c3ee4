//! Machine-readable reports written to standard output.

use serde::{Deserialize, Serialize};
use sne_core::{DeviationWitness, RaReport, Rational, Reason, State, VariantMode, Verdict};

use crate::error::inconsistency_text;
use crate::files::{RuleFile, StateFile, SCHEMA_VERSION};
use crate::number::Number;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Report {
    Construct(ConstructReport),
    Verify(VerifyReport),
    Devsearch(DevsearchReport),
    Rafilter(RafilterReport),
    Dynamics(DynamicsReport),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructReport {
    pub schema: u32,
    pub default: usize,
    pub winner: usize,
    /// Alternatives by descending welfare.
    pub welfare_order: Vec<usize>,
    pub state: StateFile,
    pub verdict: VerdictOut,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyReport {
    pub schema: u32,
    pub winner: usize,
    pub verdict: VerdictOut,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utilities: Option<Vec<Vec<Number>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictOut {
    pub stable: bool,
    pub reason: String,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternative: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessOut>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessOut {
    pub case: String,
    pub mode: String,
    pub rule: RuleFile,
    pub winner: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Number>,
    pub gains: Vec<GainOut>,
    pub state: StateFile,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainOut {
    pub agent: usize,
    pub gain: Number,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridOut {
    pub denominator: u32,
    pub magnitude: u32,
    pub coalition_cap: usize,
    pub mode: String,
    pub budget: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_alt: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DevsearchReport {
    pub schema: u32,
    pub outcome: String,
    pub checks: u64,
    pub grid: GridOut,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessOut>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RafilterReport {
    pub schema: u32,
    pub winner: usize,
    pub candidates: Vec<RaCandidate>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaCandidate {
    pub alternative: usize,
    pub best: RaOut,
    /// Every target's report; only at full verbosity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reports: Option<Vec<RaOut>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessOut>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaOut {
    pub target: usize,
    pub donors: Vec<usize>,
    pub ra: Number,
    pub gap: Number,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsReport {
    pub schema: u32,
    pub mode: String,
    pub terminal: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle_start: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<usize>,
    pub steps: usize,
    /// Winner of each state, start included.
    pub winners: Vec<usize>,
    /// Coalition behind each step.
    pub movers: Vec<Vec<usize>>,
    pub states: Vec<StateFile>,
}

pub fn mode_name(mode: VariantMode) -> &'static str {
    match mode {
        VariantMode::Standard => "standard",
        VariantMode::Sticky => "sticky",
        VariantMode::Anonymous => "anonymous",
    }
}

pub fn witness_out(w: &DeviationWitness<Rational>) -> WitnessOut {
    WitnessOut {
        case: w.case.tag().to_string(),
        mode: mode_name(w.mode).to_string(),
        rule: RuleFile::from_core(&w.rule),
        winner: w.winner() + 1,
        epsilon: w.epsilon.as_ref().map(Number::exact),
        gains: w
            .gains
            .iter()
            .map(|(i, g)| GainOut {
                agent: i + 1,
                gain: Number::exact(g),
            })
            .collect(),
        state: StateFile::from_core(&w.to_state),
    }
}

pub fn verdict_out(v: &Verdict<Rational>) -> VerdictOut {
    let (agent, alternative, case, detail) = match &v.reason {
        Reason::IrInfeasible { agent } => (
            agent.map(|i| i + 1),
            None,
            None,
            match agent {
                Some(i) => format!("agent {} cannot have reached this state", i + 1),
                None => "no strict gainer over the truthful outcome".to_string(),
            },
        ),
        Reason::NotWelfareMaximizing => (None, None, None, "the winner does not maximize welfare".to_string()),
        Reason::CoverageViolated { agent, alt } => (
            Some(agent + 1),
            Some(alt + 1),
            None,
            format!("agent {} strictly prefers alternative {}", agent + 1, alt + 1),
        ),
        Reason::SlackCondition { agent, case } => (
            Some(agent + 1),
            None,
            Some(case.tag().to_string()),
            format!("receiver {} can be squeezed ({case})", agent + 1),
        ),
        Reason::StateInconsistent(x) => (Some(x.agent + 1), None, None, inconsistency_text(x)),
        Reason::Stable => (None, None, None, "no coalition can profitably deviate".to_string()),
    };
    VerdictOut {
        stable: v.stable,
        reason: v.reason.tag().to_string(),
        detail,
        agent,
        alternative,
        case,
        witness: v.witness.as_ref().map(witness_out),
    }
}

pub fn ra_out(r: &RaReport<Rational>) -> RaOut {
    RaOut {
        target: r.target + 1,
        donors: r.donors.iter().map(|i| i + 1).collect(),
        ra: Number::exact(&r.ra),
        gap: Number::exact(&r.gap),
        passes: r.passes,
    }
}

pub fn utilities_out(instance: &sne_core::Instance<Rational>, state: &State<Rational>) -> Vec<Vec<Number>> {
    state
        .utilities(instance)
        .iter_rows()
        .map(|r| r.iter().map(Number::exact).collect())
        .collect()
}

pub fn schema() -> u32 {
    SCHEMA_VERSION
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_round_trip_with_their_command_tag() {
        let report = Report::Dynamics(DynamicsReport {
            schema: 1,
            mode: "sticky".into(),
            terminal: "cycle".into(),
            cycle_start: Some(0),
            period: Some(4),
            steps: 4,
            winners: vec![2, 1, 1, 1, 2],
            movers: vec![vec![1, 2]],
            states: vec![],
        });
        let text = serde_json::to_string(&report).unwrap();
        assert!(text.starts_with("{\"command\":\"dynamics\",\"schema\":1"));
        assert_eq!(serde_json::from_str::<Report>(&text).unwrap(), report);
    }
}
