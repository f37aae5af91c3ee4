use std::collections::BTreeSet;

use proptest::prelude::*;
use sne_core::rule::check_amr;
use sne_core::*;

fn q(v: i64) -> Rational {
    Rational::from_int(v)
}

fn utilities(max_n: usize, max_m: usize, top: i64) -> impl Strategy<Value = Vec<Vec<Rational>>> {
    (1..=max_n, 1..=max_m)
        .prop_flat_map(move |(n, m)| prop::collection::vec(prop::collection::vec((0..=top).prop_map(q), m), n))
}

fn instance_and_default(max_n: usize, max_m: usize, top: i64) -> impl Strategy<Value = (Instance<Rational>, usize)> {
    utilities(max_n, max_m, top).prop_flat_map(|rows| {
        let m = rows[0].len();
        (Just(Instance::from_rows(rows).unwrap()), 0..m)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn netting_balances_every_column(
        promises in prop::collection::vec((0usize..4, 0usize..4, 0usize..3, 1i64..20), 0..30)
    ) {
        let mut c: ContractMatrix<Rational> = ContractMatrix::empty(4, 3);
        for (from, to, alt, amount) in promises {
            if from != to {
                let old = c.promise(from, to, alt).clone();
                c.set_promise(from, to, alt, old + q(amount)).unwrap();
            }
        }
        prop_assert!(c.net().is_budget_balanced());
    }

    #[test]
    fn construction_is_stable_and_covered((inst, default) in instance_and_default(6, 4, 20)) {
        let rule = RuleSpec::consensus(inst.alternatives(), default).unwrap();
        let c = construct(&inst, &rule).unwrap();
        let s = &c.state;
        prop_assert!(s.tau.is_budget_balanced());
        prop_assert!(inst.is_welfare_maximizer(c.winner));
        prop_assert_eq!(s.winner(&rule), c.winner);
        let u = s.utilities(&inst);
        if !s.tau.is_null() {
            prop_assert!(full_coverage(&u, c.winner));
            prop_assert!(maximizers_agree(&inst, &u, c.winner));
            let truthful = State::truthful(&inst, &rule).winner(&rule);
            for i in 0..inst.agents() {
                prop_assert!(u[(i, c.winner)] >= *inst.utility(i, truthful));
            }
        }
        let v = verify_ir_sne(&inst, &rule, s).unwrap();
        prop_assert!(v.stable, "{}", v.reason);
    }

    #[test]
    fn constructed_states_resist_reallocation((inst, default) in instance_and_default(5, 4, 12)) {
        let rule = RuleSpec::consensus(inst.alternatives(), default).unwrap();
        let s = construct_ir_sne(&inst, default).unwrap();
        let b = s.winner(&rule);
        if b != default {
            for r in ra_reports(&inst, &rule, &s, default).unwrap() {
                prop_assert!(!r.passes);
            }
        }
    }

    #[test]
    fn grand_coalition_always_improves(rows in utilities(5, 4, 12), default in 0usize..4) {
        let inst = Instance::from_rows(rows).unwrap();
        let default = default % inst.alternatives();
        let rule = RuleSpec::consensus(inst.alternatives(), default).unwrap();
        let s = State::truthful(&inst, &rule);
        if !inst.is_welfare_maximizer(s.winner(&rule)) {
            let w = grand_coalition_deviation(&inst, &rule, &s).unwrap();
            prop_assert!(is_ir_deviation(&inst, &rule, &s, &w.to_state, VariantMode::Standard).unwrap());
            prop_assert!(inst.is_welfare_maximizer(w.winner()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn enlarging_the_grid_keeps_deviations(
        (inst, default) in instance_and_default(3, 2, 4),
        shift in 0usize..3,
    ) {
        let rule = RuleSpec::consensus(inst.alternatives(), default).unwrap();
        let s = State::truthful(&inst, &rule);
        let small = GridConfig::new(1, 2, 1 + shift % inst.agents());
        let large = GridConfig::new(2, 8, inst.agents());
        if grid_search(&inst, &rule, &s, &small).unwrap().is_found() {
            prop_assert!(grid_search(&inst, &rule, &s, &large).unwrap().is_found());
        }
    }
}

#[test]
fn consensus_and_lexicographic_rules_are_amr() {
    for m in 1..=3 {
        for n in 1..=3 {
            for d in 0..m {
                assert!(check_amr(&RuleSpec::consensus(m, d).unwrap(), n).is_ok());
            }
            for order in sne_core::rule::all_rankings(m) {
                assert!(check_amr(&RuleSpec::lexicographic(order), n).is_ok());
            }
        }
    }
}

#[test]
fn witnesses_on_random_states_are_deviations() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for _ in 0..4000 {
        let (n, m) = (rng.gen_range(2..=4), rng.gen_range(2..=3));
        let rows = (0..n)
            .map(|_| (0..m).map(|_| q(rng.gen_range(0..=6))).collect())
            .collect();
        let inst = Instance::from_rows(rows).unwrap();
        let rule = RuleSpec::consensus(m, rng.gen_range(0..m)).unwrap();
        let mut base = construct(&inst, &rule).unwrap().state;
        // shove a little money around among members of the winning column
        let b = base.winner(&rule);
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i != j {
            let amount = Rational::new(rng.gen_range(1..=3).into(), 2.into());
            let mut t = base.tau.matrix().to_rows();
            t[i][b] -= amount.clone();
            t[j][b] += amount;
            base.tau = TransferScheme::from_rows(t).unwrap();
            base.coalition.insert(i);
        }
        let u = base.utilities(&inst);
        let profile: Vec<Ranking> = (0..n)
            .map(|k| {
                let t = Ranking::by_utility(u.row(k), rule.tiebreak());
                if base.coalition.contains(&k) {
                    t.with_top(b)
                } else {
                    t
                }
            })
            .collect();
        let s = State::new(profile, base.tau.clone(), base.coalition.clone());
        let v = verify_ir_sne(&inst, &rule, &s).unwrap();
        if let Some(w) = v.witness {
            assert!(
                is_ir_deviation(&inst, &w.rule, &s, &w.to_state, w.mode).unwrap(),
                "{} witness fails for {s:?}",
                w.case
            );
            checked += 1;
        }
    }
    assert!(checked > 100, "only {checked} witnesses exercised");
}

#[test]
fn coalition_of_construction_contains_every_payer() {
    let inst = Instance::from_rows(vec![
        vec![q(6), q(1), q(2)],
        vec![q(0), q(4), q(1)],
        vec![q(1), q(2), q(3)],
    ])
    .unwrap();
    let s = construct_ir_sne(&inst, 2).unwrap();
    let payers: BTreeSet<usize> = (0..3).filter(|&i| (0..3).any(|a| s.tau.get(i, a) < &q(0))).collect();
    assert!(payers.is_subset(&s.coalition));
}
