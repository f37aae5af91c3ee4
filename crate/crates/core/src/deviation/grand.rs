//! Everyone moves together from a non-maximizer to the lowest-index welfare maximizer.

use crate::deviation::witness::{finalize, target_state, DeviationWitness, WitnessCase};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{Instance, TransferScheme};
use crate::rule::RuleSpec;
use crate::scalar::Scalar;
use crate::state::{State, VariantMode};

/// Splits the welfare surplus equally: `U'_i(b) = U_i(c) + (SW(b) − SW(c))/n`,
/// and every other alternative sits below `b` by its own welfare gap over `n`.
/// The current winner `c` keeps its transfers.
pub fn grand_coalition_deviation<S: Scalar>(
    instance: &Instance<S>,
    rule: &RuleSpec,
    state: &State<S>,
) -> Result<DeviationWitness<S>> {
    state.check_shape(instance, rule)?;
    let c = state.winner(rule);
    if instance.is_welfare_maximizer(c) {
        return Err(Error::Precondition(format!("winner {c} already maximizes welfare")));
    }
    let b = instance.welfare_maximizers()[0];
    let (n, m) = (instance.agents(), instance.alternatives());
    let n_s = S::from_usize(n).expect("agent count fits the scalar");
    let sw: Vec<S> = (0..m).map(|a| instance.social_welfare(a)).collect();
    let share = (sw[b].clone() - sw[c].clone()) / n_s.clone();
    let u = state.utilities(instance);

    let mut tau = Matrix::zeros(n, m);
    for i in 0..n {
        let top = u[(i, c)].clone() + share.clone();
        for a in 0..m {
            let target = top.clone() - (sw[b].clone() - sw[a].clone()) / n_s.clone();
            tau[(i, a)] = target - instance.utility(i, a).clone();
        }
    }
    let tau = TransferScheme::from_matrix_unchecked(tau);
    // Everyone gains the same positive share, so everyone can join.
    let to = target_state(instance, rule, tau, (0..n).collect(), b)?;
    finalize(
        instance,
        state,
        rule,
        rule,
        to,
        VariantMode::Standard,
        WitnessCase::GrandCoalition,
        None,
    )
}
