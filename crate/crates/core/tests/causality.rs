mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use accountable::causality::{CausalityError, Expr, StructuralModel};
use accountable::EntityId;
use common::oracles::{naive_causes, naive_eval, Oracle};
use common::{ids, random_expr, random_redundant_structural, random_structural};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Set = BTreeSet<EntityId>;

fn library_causes(sm: &StructuralModel, event: &EntityId) -> Oracle {
    match (sm.but_for_causes(event), sm.minimal_cause_sets(event)) {
        (Err(CausalityError::EventNotMapped(_)), Err(CausalityError::EventNotMapped(_))) => Oracle::NotMapped,
        (Err(CausalityError::EventNotOccurring(_)), Err(CausalityError::EventNotOccurring(_))) => {
            Oracle::NotOccurring
        }
        (Ok(but_for), Ok(minimal)) => Oracle::Causes { but_for, minimal },
        other => panic!("inconsistent results {other:?}"),
    }
}

fn random_model(rng: &mut StdRng, max_vars: usize) -> StructuralModel {
    let n = rng.gen_range(1..=max_vars);
    let items = random_structural(rng, n, &ids("C", 10), &ids("E", 3));
    StructuralModel::from_items(&items).expect("generated models are well formed")
}

#[test]
fn matches_naive_enumeration_on_generated_corpus() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(2024);
    let mut with_causes = 0;
    let mut multi = 0;
    for i in 0..600 {
        let sm = if i % 2 == 0 { random_model(&mut rng, 12) } else { StructuralModel::from_items(&random_redundant_structural(&mut rng, 12)).unwrap() };
        assert!(sm.variable_count() <= 12);
        for e in ids("E", 3) {
            let expected = naive_causes(&sm, &e);
            if let Oracle::Causes { minimal, .. } = &expected {
                with_causes += 1;
                if minimal.iter().any(|s| s.len() > 1) {
                    multi += 1;
                }
            }
            assert_eq!(library_causes(&sm, &e), expected, "{:?}", sm.items());
        }
    }
    // The corpus has to exercise the interesting cases.
    assert!(with_causes >= 200, "{with_causes}");
    assert!(multi >= 20, "{multi}");
    assert!(start.elapsed() < Duration::from_secs(60));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn evaluate_matches_naive_evaluator(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let sm = random_model(&mut rng, 12);
        let vars: Vec<EntityId> = sm.exogenous().keys().chain(sm.equations().keys()).cloned().collect();
        let mut overrides = BTreeMap::new();
        for v in vars {
            if rng.gen_bool(0.2) {
                overrides.insert(v, rng.gen());
            }
        }
        prop_assert_eq!(sm.evaluate(&overrides).unwrap(), naive_eval(&sm, &overrides));
    }

    #[test]
    fn overriding_an_equation_cuts_its_inputs(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let sm = random_model(&mut rng, 12);
        for v in sm.equations().keys() {
            for b in [false, true] {
                let overrides = BTreeMap::from([(v.clone(), b)]);
                prop_assert_eq!(sm.evaluate(&overrides).unwrap()[v], b);
            }
        }
    }

    #[test]
    fn minimal_sets_are_minimal_and_sound(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let sm = random_model(&mut rng, 12);
        let by_component: BTreeMap<&EntityId, &EntityId> = sm.component_map().iter().map(|(v, c)| (c, v)).collect();
        for e in ids("E", 3) {
            let Ok(sets) = sm.minimal_cause_sets(&e) else { continue };
            let var = sm.event_map().iter().find(|(_, x)| **x == e).unwrap().0.clone();
            let actual = sm.evaluate(&BTreeMap::new()).unwrap();
            let flips = |s: &Set| {
                let o: BTreeMap<EntityId, bool> =
                    s.iter().map(|c| (by_component[c].clone(), !actual[by_component[c]])).collect();
                !sm.evaluate(&o).unwrap()[&var]
            };
            for s in &sets {
                prop_assert!(flips(s));
                for c in s {
                    let mut smaller = s.clone();
                    smaller.remove(c);
                    prop_assert!(smaller.is_empty() || !flips(&smaller));
                }
            }
            let singletons: Set = sets.iter().filter(|s| s.len() == 1).flatten().cloned().collect();
            prop_assert_eq!(sm.but_for_causes(&e).unwrap(), singletons);
            prop_assert_eq!(sm.minimal_cause_sets(&e).unwrap(), sets);
        }
    }
}

#[test]
fn search_bound_is_enforced() {
    let names = ids("V", 21);
    let exo: BTreeMap<EntityId, bool> = names.iter().map(|v| (v.clone(), true)).collect();
    let mut rng = StdRng::seed_from_u64(1);
    let hit = random_expr(&mut rng, &names, 2);
    let eqs = BTreeMap::from([(EntityId::new("HIT").unwrap(), Expr::or(hit, Expr::var("V0")))]);
    let events = BTreeMap::from([(EntityId::new("HIT").unwrap(), EntityId::new("E").unwrap())]);
    let comps: BTreeMap<EntityId, EntityId> =
        names.iter().zip(ids("C", 21)).map(|(v, c)| (v.clone(), c)).collect();
    let sm = StructuralModel::new(exo, eqs, events, comps).unwrap();
    let e = EntityId::new("E").unwrap();
    assert_eq!(
        sm.minimal_cause_sets(&e),
        Err(CausalityError::SearchSpaceTooLarge { count: 21, max: 20 })
    );
    // but-for search is linear and stays available.
    assert!(sm.but_for_causes(&e).is_ok());
}
