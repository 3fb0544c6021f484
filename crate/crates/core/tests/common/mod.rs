#![allow(dead_code)]

use std::collections::BTreeMap;

use accountable::causality::Expr;
use accountable::model::{
    BeingKind, CpsDecl, Declaration, EventKind, ObservationFact, PrincipalKind, StructItem,
};
use accountable::EntityId;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub mod oracles;

pub fn id(s: &str) -> EntityId {
    EntityId::new(s).unwrap()
}

pub fn ids(prefix: &str, n: usize) -> Vec<EntityId> {
    (0..n).map(|i| id(&format!("{prefix}{i}"))).collect()
}

fn subset<T: Clone>(rng: &mut StdRng, items: &[T], p: f64) -> Vec<T> {
    items.iter().filter(|_| rng.gen_bool(p)).cloned().collect()
}

fn pick<'a, T>(rng: &mut StdRng, items: &'a [T]) -> &'a T {
    items.choose(rng).unwrap()
}

/// Entity universe of a generated model.
#[derive(Debug, Clone)]
pub struct Universe {
    pub components: Vec<EntityId>,
    pub principals: Vec<EntityId>,
    pub beings: Vec<EntityId>,
    pub events: Vec<EntityId>,
    pub accounts: Vec<EntityId>,
    pub actions: Vec<EntityId>,
}

impl Universe {
    pub fn random(rng: &mut StdRng, max: usize) -> Self {
        Universe {
            components: ids("C", rng.gen_range(0..=max)),
            principals: ids("P", rng.gen_range(0..=max)),
            beings: ids("B", rng.gen_range(0..=max)),
            events: ids("E", rng.gen_range(0..=max)),
            accounts: ids("A", rng.gen_range(0..=max)),
            actions: ids("X", rng.gen_range(0..=max)),
        }
    }

    pub fn declarations(&self, rng: &mut StdRng) -> Vec<Declaration> {
        let mut out = Vec::new();
        out.extend(self.components.iter().cloned().map(Declaration::Component));
        for p in &self.principals {
            let k = if rng.gen() { PrincipalKind::Person } else { PrincipalKind::LegalEntity };
            out.push(Declaration::Principal(p.clone(), k));
        }
        for b in &self.beings {
            let k = if rng.gen() { BeingKind::Human } else { BeingKind::Animal };
            out.push(Declaration::Being(b.clone(), k));
        }
        for e in &self.events {
            let k = if rng.gen() { EventKind::System } else { EventKind::Environment };
            out.push(Declaration::Event(e.clone(), k));
        }
        out.extend(self.accounts.iter().cloned().map(Declaration::Account));
        out.extend(self.actions.iter().cloned().map(Declaration::Action));
        out
    }

    pub fn random_observation(&self, rng: &mut StdRng) -> Option<ObservationFact> {
        if self.events.is_empty() || self.components.is_empty() || self.accounts.is_empty() {
            return None;
        }
        Some(ObservationFact::new(
            pick(rng, &self.events).clone(),
            pick(rng, &self.components).clone(),
            pick(rng, &self.accounts).clone(),
        ))
    }
}

/// Base relations only: observations, setups, account ownership,
/// corrections and caused facts.
pub fn random_relations(rng: &mut StdRng, u: &Universe) -> Vec<Declaration> {
    let mut out = Vec::new();
    for _ in 0..rng.gen_range(0..12) {
        if let Some(o) = u.random_observation(rng) {
            out.push(Declaration::Observation(o));
        }
    }
    if !u.principals.is_empty() {
        for c in &u.components {
            if rng.gen_bool(0.5) {
                out.push(Declaration::Setup(c.clone(), pick(rng, &u.principals).clone()));
            }
        }
        for a in &u.accounts {
            for p in &u.principals {
                if rng.gen_bool(0.3) {
                    out.push(Declaration::HasAccount(a.clone(), p.clone()));
                }
            }
        }
        if !u.actions.is_empty() {
            for p in &u.principals {
                for c in &u.components {
                    if rng.gen_bool(0.25) {
                        out.push(Declaration::Correction(p.clone(), c.clone(), pick(rng, &u.actions).clone()));
                    }
                }
            }
        }
    }
    if !u.components.is_empty() {
        for e in &u.events {
            if rng.gen_bool(0.4) {
                let mut cs = subset(rng, &u.components, 0.4);
                if cs.is_empty() {
                    cs.push(pick(rng, &u.components).clone());
                }
                out.push(Declaration::Caused(e.clone(), cs));
            }
        }
    }
    out
}

fn scenario_name(rng: &mut StdRng) -> String {
    const CHARS: &[char] = &['a', 'Z', '0', ' ', '-', '"', '\\', '#', 'é', '{', '_'];
    (0..rng.gen_range(0..10)).map(|_| *pick(rng, CHARS)).collect()
}

/// Random acyclic boolean expression over `inputs`.
pub fn random_expr(rng: &mut StdRng, inputs: &[EntityId], depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.35) {
        return Expr::Var(pick(rng, inputs).clone());
    }
    match rng.gen_range(0..3) {
        0 => Expr::not(random_expr(rng, inputs, depth - 1)),
        1 => Expr::and(random_expr(rng, inputs, depth - 1), random_expr(rng, inputs, depth - 1)),
        _ => Expr::or(random_expr(rng, inputs, depth - 1), random_expr(rng, inputs, depth - 1)),
    }
}

/// Random structural block with `n` variables. Maps are injective: each
/// mapped variable gets its own component or event.
pub fn random_structural(
    rng: &mut StdRng,
    n: usize,
    components: &[EntityId],
    events: &[EntityId],
) -> Vec<StructItem> {
    let mut vars = ids("V", n);
    vars.shuffle(rng);
    let n_exo = rng.gen_range(1..=n.max(1)).min(n);
    let mut items = Vec::new();
    for (i, v) in vars.iter().enumerate() {
        if i < n_exo {
            items.push(StructItem::Exo(v.clone(), rng.gen()));
        } else {
            items.push(StructItem::Eq(v.clone(), random_expr(rng, &vars[..i], 3)));
        }
    }
    let mut order: Vec<&EntityId> = vars.iter().collect();
    order.shuffle(rng);
    for (v, c) in order.iter().zip(subset(rng, components, 0.7)) {
        items.push(StructItem::MapComponent((*v).clone(), c));
    }
    order.shuffle(rng);
    for (v, e) in order.iter().zip(subset(rng, events, 0.5)) {
        items.push(StructItem::MapEvent((*v).clone(), e));
    }
    items.shuffle(rng);
    items
}

/// Structural block whose event E0 sits on a disjunction over the rest of
/// the model, which tends to need several flips to falsify.
pub fn random_redundant_structural(rng: &mut StdRng, max_vars: usize) -> Vec<StructItem> {
    let n = rng.gen_range(2..max_vars);
    let mut items = random_structural(rng, n, &ids("C", 10), &[]);
    let vars = ids("V", n);
    let top = id("TOP");
    let body = Expr::or(random_expr(rng, &vars, 2), random_expr(rng, &vars, 2));
    items.push(StructItem::Eq(top.clone(), body));
    items.push(StructItem::MapEvent(top, id("E0")));
    items
}

/// A full random declaration list exercising every statement kind. Always
/// builds successfully.
pub fn random_declarations(rng: &mut StdRng, max: usize) -> Vec<Declaration> {
    let u = Universe::random(rng, max);
    let mut out = Vec::new();
    if rng.gen_bool(0.8) {
        out.push(Declaration::Scenario(scenario_name(rng)));
    }
    out.extend(u.declarations(rng));
    let relations = random_relations(rng, &u);
    let setups: BTreeMap<EntityId, EntityId> = relations
        .iter()
        .filter_map(|d| match d {
            Declaration::Setup(c, p) => Some((c.clone(), p.clone())),
            _ => None,
        })
        .collect();
    out.extend(relations);

    let n_cps = if rng.gen_bool(0.7) { rng.gen_range(1..=3) } else { 0 };
    let cps_ids = ids("S", n_cps);
    for s in &cps_ids {
        let mut cps = CpsDecl::new(s.clone());
        cps.components = subset(rng, &u.components, 0.5).into_iter().collect();
        cps.principals = subset(rng, &u.principals, 0.5).into_iter().collect();
        cps.setups = setups.iter().filter(|_| rng.gen_bool(0.5)).map(|(c, p)| (c.clone(), p.clone())).collect();
        for _ in 0..rng.gen_range(0..4) {
            if let Some(o) = u.random_observation(rng) {
                cps.logs.insert(o);
            }
        }
        out.push(Declaration::Cps(cps));
    }
    if n_cps > 0 {
        out.push(Declaration::Ego(pick(rng, &cps_ids).clone()));
        if rng.gen_bool(0.3) {
            out.push(Declaration::StsPrincipals(subset(rng, &u.principals, 0.5)));
        }
        if rng.gen_bool(0.3) {
            out.push(Declaration::StsBeings(subset(rng, &u.beings, 0.5)));
        }
        if rng.gen_bool(0.3) {
            let foreign = (0..rng.gen_range(0..4)).map(|_| pick(rng, &cps_ids).clone()).collect();
            out.push(Declaration::StsForeign(foreign));
        }
        if rng.gen_bool(0.3) {
            out.push(Declaration::MissedByEgo(subset(rng, &u.events, 0.5)));
        }
    }
    if rng.gen_bool(0.3) {
        out.push(Declaration::MechanismAccounts(subset(rng, &u.accounts, 0.6)));
    }
    if rng.gen_bool(0.3) {
        let n = rng.gen_range(1..=6);
        out.push(Declaration::Structural(random_structural(rng, n, &u.components, &u.events)));
    }
    out
}
