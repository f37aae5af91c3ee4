//! Instance and state files. Indices are 1-based on disk and 0-based in memory.

use std::collections::BTreeSet;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sne_core::{Instance, ModelError, Ranking, Rational, RuleKind, RuleSpec, State, TransferScheme};

use crate::error::CliError;
use crate::number::Number;

pub const SCHEMA_VERSION: u32 = 1;

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default = "schema_version")]
    pub schema: u32,
    pub agents: usize,
    pub alternatives: usize,
    pub utilities: Vec<Vec<Number>>,
    pub rule: RuleFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tiebreak: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum RuleFile {
    Consensus { default: usize },
    Lexicographic { order: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    #[serde(default = "schema_version")]
    pub schema: u32,
    pub profile: Vec<Vec<usize>>,
    pub transfers: Vec<Vec<Number>>,
    pub coalition: Vec<usize>,
}

/// Transfer schemes offered to the candidate-rotation dynamics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidatesFile {
    #[serde(default = "schema_version")]
    pub schema: u32,
    pub schemes: Vec<Vec<Vec<Number>>>,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_json(&text).map_err(|e| match e {
        CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Parses a report printed by the binary.
pub fn parse_json_report(text: &str) -> Result<crate::report::Report, CliError> {
    parse_json(text)
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
}

fn check_schema(schema: u32) -> Result<(), CliError> {
    if schema == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(CliError::Parse(format!(
            "unsupported schema version {schema} (this build reads {SCHEMA_VERSION})"
        )))
    }
}

fn matrix(what: &str, rows: &[Vec<Number>], n: usize, m: usize) -> Result<Vec<Vec<Rational>>, CliError> {
    if rows.len() != n {
        return Err(CliError::Parse(format!("{what}: {} rows, expected {n}", rows.len())));
    }
    rows.iter()
        .enumerate()
        .map(|(r, row)| {
            if row.len() != m {
                return Err(CliError::Parse(format!(
                    "{what}: row {} has {} entries, expected {m}",
                    r + 1,
                    row.len()
                )));
            }
            row.iter()
                .enumerate()
                .map(|(c, x)| {
                    x.to_rational()
                        .map_err(|e| CliError::Parse(format!("{what}: row {}, column {}: {e}", r + 1, c + 1)))
                })
                .collect()
        })
        .collect()
}

fn index(what: &str, one_based: usize, limit: usize) -> Result<usize, CliError> {
    if (1..=limit).contains(&one_based) {
        Ok(one_based - 1)
    } else {
        Err(CliError::Parse(format!(
            "{what} {one_based} is out of range 1..={limit}"
        )))
    }
}

fn ranking(what: &str, order: &[usize], m: usize) -> Result<Ranking, CliError> {
    let zero: Vec<usize> = order.iter().map(|&a| index(what, a, m)).collect::<Result<_, _>>()?;
    if zero.len() != m {
        return Err(CliError::Parse(format!(
            "{what} lists {} alternatives, expected {m}",
            zero.len()
        )));
    }
    Ranking::new(zero).map_err(|_| CliError::Parse(format!("{what} {order:?} is not a permutation")))
}

fn one_based(order: &[usize]) -> Vec<usize> {
    order.iter().map(|a| a + 1).collect()
}

fn model_error(what: &str, e: ModelError) -> CliError {
    let detail = match e {
        ModelError::NegativeUtility { agent, alt } => {
            format!("row {}, column {}: utilities must be non-negative", agent + 1, alt + 1)
        }
        ModelError::Unbalanced { alt } => format!("column {} does not sum to zero", alt + 1),
        other => other.to_string(),
    };
    CliError::Parse(format!("{what}: {detail}"))
}

fn transfers(rows: Vec<Vec<Rational>>) -> Result<TransferScheme<Rational>, CliError> {
    TransferScheme::from_rows(rows).map_err(|e| model_error("transfers", e))
}

fn exact_rows(rows: Vec<Vec<Rational>>) -> Vec<Vec<Number>> {
    rows.iter().map(|r| r.iter().map(Number::exact).collect()).collect()
}

impl InstanceFile {
    pub fn load(&self) -> Result<(Instance<Rational>, RuleSpec), CliError> {
        check_schema(self.schema)?;
        let (n, m) = (self.agents, self.alternatives);
        if n == 0 || m == 0 {
            return Err(CliError::Parse(
                "an instance needs at least one agent and one alternative".into(),
            ));
        }
        let rows = matrix("utilities", &self.utilities, n, m)?;
        let instance = Instance::from_rows(rows).map_err(|e| model_error("utilities", e))?;
        let rule = match &self.rule {
            RuleFile::Consensus { default } => {
                RuleSpec::consensus(m, index("default alternative", *default, m)?).expect("index checked")
            }
            RuleFile::Lexicographic { order } => RuleSpec::lexicographic(ranking("rule order", order, m)?),
        };
        let rule = match &self.tiebreak {
            Some(t) => rule.with_tiebreak(ranking("tiebreak", t, m)?).expect("length checked"),
            None => rule,
        };
        Ok((instance, rule))
    }

    pub fn from_core(instance: &Instance<Rational>, rule: &RuleSpec) -> Self {
        let identity = Ranking::identity(instance.alternatives());
        InstanceFile {
            schema: SCHEMA_VERSION,
            agents: instance.agents(),
            alternatives: instance.alternatives(),
            utilities: exact_rows(instance.utilities().to_rows()),
            rule: RuleFile::from_core(rule),
            tiebreak: (*rule.tiebreak() != identity).then(|| one_based(rule.tiebreak().order())),
        }
    }
}

impl RuleFile {
    pub fn from_core(rule: &RuleSpec) -> Self {
        match rule.kind() {
            RuleKind::Consensus { default } => RuleFile::Consensus { default: default + 1 },
            RuleKind::Lexicographic { order } => RuleFile::Lexicographic {
                order: one_based(order.order()),
            },
        }
    }
}

impl StateFile {
    pub fn load(&self, n: usize, m: usize) -> Result<State<Rational>, CliError> {
        check_schema(self.schema)?;
        if self.profile.len() != n {
            return Err(CliError::Parse(format!(
                "profile has {} rankings, expected {n}",
                self.profile.len()
            )));
        }
        let profile = self
            .profile
            .iter()
            .enumerate()
            .map(|(i, r)| ranking(&format!("profile row {}", i + 1), r, m))
            .collect::<Result<Vec<_>, _>>()?;
        let tau = transfers(matrix("transfers", &self.transfers, n, m)?)?;
        let coalition = self
            .coalition
            .iter()
            .map(|&i| index("coalition member", i, n))
            .collect::<Result<BTreeSet<_>, _>>()?;
        Ok(State::new(profile, tau, coalition))
    }

    pub fn from_core(state: &State<Rational>) -> Self {
        StateFile {
            schema: SCHEMA_VERSION,
            profile: state.profile.iter().map(|r| one_based(r.order())).collect(),
            transfers: exact_rows(state.tau.matrix().to_rows()),
            coalition: state.coalition.iter().map(|i| i + 1).collect(),
        }
    }
}

impl CandidatesFile {
    pub fn load(&self, n: usize, m: usize) -> Result<Vec<TransferScheme<Rational>>, CliError> {
        check_schema(self.schema)?;
        self.schemes
            .iter()
            .enumerate()
            .map(|(k, rows)| transfers(matrix(&format!("scheme {}", k + 1), rows, n, m)?))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"{
        "schema": 1, "agents": 5, "alternatives": 2,
        "utilities": [[2, 4], [1, 1], [2, 3], [1, 2], [11, 3]],
        "rule": {"type": "consensus", "default": 2}
    }"#;

    #[test]
    fn instance_round_trips() {
        let file: InstanceFile = parse_json(EXAMPLE).unwrap();
        let text = serde_json::to_string(&file).unwrap();
        assert_eq!(parse_json::<InstanceFile>(&text).unwrap(), file);
        let (inst, rule) = file.load().unwrap();
        assert_eq!(rule.default_alt(), Some(1));
        assert_eq!(InstanceFile::from_core(&inst, &rule).load().unwrap(), (inst, rule));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = EXAMPLE.replace("\"schema\": 1,", "\"schema\": 1, \"comment\": \"x\",");
        assert!(parse_json::<InstanceFile>(&text).is_err());
        let rule = EXAMPLE.replace("\"default\": 2", "\"default\": 2, \"order\": [1, 2]");
        assert!(parse_json::<InstanceFile>(&rule).is_err());
    }

    #[test]
    fn zero_denominator_names_its_cell() {
        let text = EXAMPLE.replace("[1, 2]", "[1, \"3/0\"]");
        let err = parse_json::<InstanceFile>(&text).unwrap().load().unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("row 4, column 2"), "{err}");
    }

    #[test]
    fn indices_are_one_based() {
        let text = EXAMPLE.replace("\"default\": 2", "\"default\": 0");
        assert!(parse_json::<InstanceFile>(&text).unwrap().load().is_err());
        let text = EXAMPLE.replace("\"default\": 2", "\"default\": 3");
        assert!(parse_json::<InstanceFile>(&text).unwrap().load().is_err());
    }

    #[test]
    fn state_round_trips_and_checks_balance() {
        let file = StateFile {
            schema: 1,
            profile: vec![vec![1, 2], vec![2, 1]],
            transfers: vec![
                vec![Number::Text("1/2".into()), Number::Int(0)],
                vec![Number::Text("-1/2".into()), Number::Int(0)],
            ],
            coalition: vec![1],
        };
        let state = file.load(2, 2).unwrap();
        let back = StateFile::from_core(&state);
        assert_eq!(back.load(2, 2).unwrap(), state);
        let text = serde_json::to_string(&back).unwrap();
        assert_eq!(parse_json::<StateFile>(&text).unwrap(), back);

        let mut bad = file.clone();
        bad.transfers[1][0] = Number::Int(1);
        assert!(bad.load(2, 2).unwrap_err().to_string().contains("column 1"));
    }
}
