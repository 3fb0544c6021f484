use std::collections::{BTreeMap, BTreeSet};

use accountable::causality::{Expr, StructuralModel};
use accountable::model::ObservationFact;
use accountable::{EntityId, Model};

type Set = BTreeSet<EntityId>;

// Brute-force oracles. They enumerate the whole declared universe and test
// each base relation by membership, independently of the library code.

pub fn o_informed(m: &Model, c: &EntityId) -> Set {
    let mut out = Set::new();
    for p in m.principals().keys() {
        for e in m.events().keys() {
            for a in m.accounts() {
                let observed = m.observations().contains(&ObservationFact::new(e.clone(), c.clone(), a.clone()));
                if observed && m.has_account().contains(&(a.clone(), p.clone())) {
                    out.insert(p.clone());
                }
            }
        }
    }
    out
}

pub fn o_can_correct(m: &Model, p: &EntityId, c: &EntityId) -> bool {
    m.actions().iter().any(|x| m.correction_actions().get(&(p.clone(), c.clone())) == Some(x))
}

pub fn o_responsible(m: &Model, c: &EntityId) -> Set {
    let informed = o_informed(m, c);
    m.principals().keys().filter(|p| informed.contains(*p) && o_can_correct(m, p, c)).cloned().collect()
}

pub fn o_constructed(m: &Model, c: &EntityId) -> Set {
    m.principals()
        .keys()
        .filter(|p| m.component_configuration().iter().any(|(k, v)| k == c && v == *p))
        .cloned()
        .collect()
}

pub fn o_lindberg(m: &Model, c: &EntityId) -> Set {
    let informed = o_informed(m, c);
    let responsible = o_responsible(m, c);
    let constructed = o_constructed(m, c);
    m.principals()
        .keys()
        .filter(|p| informed.contains(*p) && (responsible.contains(*p) || constructed.contains(*p)))
        .cloned()
        .collect()
}

pub fn o_raci(m: &Model, causes: &Set) -> Set {
    let mut out = Set::new();
    for p in m.principals().keys() {
        for c in m.components() {
            if causes.contains(c) && o_informed(m, c).contains(p) && o_can_correct(m, p, c) {
                out.insert(p.clone());
            }
        }
    }
    out
}

pub fn o_missed(m: &Model) -> Set {
    let ego = m.ego().unwrap();
    m.events()
        .keys()
        .filter(|e| !ego.logs.iter().any(|o| o.event == **e))
        .cloned()
        .collect()
}

/// Naive evaluator: sweeps every equation until nothing changes.
pub fn naive_eval(sm: &StructuralModel, overrides: &BTreeMap<EntityId, bool>) -> BTreeMap<EntityId, bool> {
    fn eval(e: &Expr, v: &BTreeMap<EntityId, bool>) -> bool {
        match e {
            Expr::Var(x) => v.get(x).copied().unwrap_or(false),
            Expr::Not(a) => !eval(a, v),
            Expr::And(a, b) => eval(a, v) && eval(b, v),
            Expr::Or(a, b) => eval(a, v) || eval(b, v),
        }
    }
    let mut values: BTreeMap<EntityId, bool> = sm.exogenous().clone();
    for v in sm.equations().keys() {
        values.insert(v.clone(), false);
    }
    values.extend(overrides.iter().map(|(k, b)| (k.clone(), *b)));
    for _ in 0..=values.len() {
        for (v, e) in sm.equations() {
            if !overrides.contains_key(v) {
                let x = eval(e, &values);
                values.insert(v.clone(), x);
            }
        }
    }
    values
}

#[derive(Debug, PartialEq)]
pub enum Oracle {
    NotMapped,
    NotOccurring,
    Causes { but_for: Set, minimal: Vec<Set> },
}

/// Enumerates every subset of component variables, keeps those whose flip
/// falsifies the event, then drops any with a flipping proper subset.
pub fn naive_causes(sm: &StructuralModel, event: &EntityId) -> Oracle {
    let Some(var) = sm.event_map().iter().find(|(_, e)| *e == event).map(|(v, _)| v.clone()) else {
        return Oracle::NotMapped;
    };
    let actual = naive_eval(sm, &BTreeMap::new());
    if !actual[&var] {
        return Oracle::NotOccurring;
    }
    let cands: Vec<(&EntityId, &EntityId)> = sm.component_map().iter().collect();
    let k = cands.len();
    let mut flipping: Vec<Set> = Vec::new();
    for mask in 0u32..(1 << k) {
        let overrides: BTreeMap<EntityId, bool> = (0..k)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| (cands[i].0.clone(), !actual[cands[i].0]))
            .collect();
        if !overrides.is_empty() && !naive_eval(sm, &overrides)[&var] {
            flipping.push((0..k).filter(|i| mask & (1 << i) != 0).map(|i| cands[i].1.clone()).collect());
        }
    }
    let mut minimal: Vec<Set> = flipping
        .iter()
        .filter(|s| !flipping.iter().any(|t| t.len() < s.len() && t.is_subset(s)))
        .cloned()
        .collect();
    minimal.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let but_for = flipping.iter().filter(|s| s.len() == 1).flatten().cloned().collect();
    Oracle::Causes { but_for, minimal }
}
