use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{Instance, TransferScheme};
use crate::ranking::{Profile, Ranking};
use crate::rule::RuleSpec;
use crate::scalar::Scalar;
use crate::state::{is_ir_deviation, State, VariantMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WitnessCase {
    StrictSlack,
    LooseDonors,
    BindingDonor,
    GrandCoalition,
    Reallocation,
    Grid,
}

impl WitnessCase {
    pub fn tag(self) -> &'static str {
        match self {
            WitnessCase::StrictSlack => "strict-slack",
            WitnessCase::LooseDonors => "loose-donors",
            WitnessCase::BindingDonor => "binding-donor",
            WitnessCase::GrandCoalition => "grand-coalition",
            WitnessCase::Reallocation => "reallocation",
            WitnessCase::Grid => "grid",
        }
    }
}

impl fmt::Display for WitnessCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A deviation that has already been checked against its source state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DeviationWitness<S> {
    pub to_state: State<S>,
    pub rule: RuleSpec,
    pub mode: VariantMode,
    pub case: WitnessCase,
    pub epsilon: Option<S>,
    /// `(member, U'_i(new winner) − U_i(old winner))`, ascending by member.
    pub gains: Vec<(usize, S)>,
}

impl<S: Scalar> DeviationWitness<S> {
    pub fn winner(&self) -> usize {
        self.to_state.winner(&self.rule)
    }
}

/// Runs the IR check and packages the result, or reports why it failed.
#[allow(clippy::too_many_arguments)]
pub fn finalize<S: Scalar>(
    instance: &Instance<S>,
    from: &State<S>,
    rule: &RuleSpec,
    from_rule: &RuleSpec,
    to: State<S>,
    mode: VariantMode,
    case: WitnessCase,
    epsilon: Option<S>,
) -> Result<DeviationWitness<S>> {
    // A witness may switch rules (reallocation uses a lexicographic order);
    // the old winner is always judged under the source rule.
    let ok = if rule == from_rule {
        is_ir_deviation(instance, rule, from, &to, mode)
    } else {
        to.check_shape(instance, rule)
            .map_err(Error::from)
            .and_then(|_| is_ir_deviation_across(instance, from_rule, rule, from, &to, mode))
    };
    match ok {
        Ok(true) => {}
        Ok(false) => {
            return Err(Error::WitnessRejected(format!(
                "{case} deviation is not individually rational"
            )))
        }
        Err(e) => {
            return Err(Error::WitnessRejected(format!(
                "{case} deviation breaks membership: {e}"
            )))
        }
    }
    let (w, w2) = (from.winner(from_rule), to.winner(rule));
    let (u, u2) = (from.utilities(instance), to.utilities(instance));
    let gains = to
        .coalition
        .iter()
        .map(|&i| (i, u2[(i, w2)].clone() - u[(i, w)].clone()))
        .collect();
    Ok(DeviationWitness {
        to_state: to,
        rule: rule.clone(),
        mode,
        case,
        epsilon,
        gains,
    })
}

/// IR check when the source winner comes from `from_rule` and the target
/// winner from `to_rule`; membership is judged with `to_rule`'s tiebreak.
fn is_ir_deviation_across<S: Scalar>(
    instance: &Instance<S>,
    from_rule: &RuleSpec,
    to_rule: &RuleSpec,
    from: &State<S>,
    to: &State<S>,
    mode: VariantMode,
) -> Result<bool> {
    crate::state::check_membership(instance, to_rule, from, to, mode)?;
    if to.coalition.is_empty() {
        return Ok(false);
    }
    let (w, w2) = (from.winner(from_rule), to.winner(to_rule));
    let (u, u2) = (from.utilities(instance), to.utilities(instance));
    let mut strict = false;
    for &i in &to.coalition {
        if u2[(i, w2)] < u[(i, w)] {
            return Ok(false);
        }
        strict |= u2[(i, w2)] > u[(i, w)];
    }
    Ok(strict)
}

/// Votes for a deviation under standard semantics: members put `target`
/// first and otherwise follow their preferences, outsiders vote truthfully.
/// Outsiders whose truthful top the rule cannot tolerate are pulled into the
/// coalition, where the IR check then judges them like everyone else.
pub fn settle_votes<S: Scalar>(
    u: &Matrix<S>,
    rule: &RuleSpec,
    target: usize,
    coalition: &mut BTreeSet<usize>,
) -> Profile {
    let tiebreak = rule.tiebreak();
    (0..u.rows())
        .map(|i| {
            let truthful = Ranking::by_utility(u.row(i), tiebreak);
            if !coalition.contains(&i) && rule.top_admits(truthful.top(), target) {
                truthful
            } else {
                coalition.insert(i);
                truthful.with_top(target)
            }
        })
        .collect()
}

/// Builds the target state from new transfers and a base coalition.
pub fn target_state<S: Scalar>(
    instance: &Instance<S>,
    rule: &RuleSpec,
    tau: TransferScheme<S>,
    mut coalition: BTreeSet<usize>,
    target: usize,
) -> Result<State<S>> {
    let u = crate::model::effective_utilities(instance, &tau)?;
    let profile = settle_votes(&u, rule, target, &mut coalition);
    Ok(State::new(profile, tau, coalition))
}
