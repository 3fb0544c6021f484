//! The `caused` interface.
//!
//! Causes come either from explicit facts in the model or from a small
//! boolean structural model. For the latter we search counterfactually:
//! a component is a but-for cause of an event when flipping its variable
//! alone (as an intervention) makes the event variable false, and a minimal
//! cause set is an inclusion-minimal set of component variables whose joint
//! flip does the same.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::{ComponentSet, EntityId, Model, ModelError, StructItem, VarName};

/// Upper bound on the number of variables in a structural model.
pub const MAX_VARIABLES: usize = 24;
/// Upper bound on the number of component-mapped variables for subset search.
pub const MAX_SEARCH_VARIABLES: usize = 20;

const RESERVED: [&str; 5] = ["and", "or", "not", "true", "false"];

/// Boolean expression over structural variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(VarName),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(EntityId::new(name).expect("valid variable name"))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::Or(Box::new(a), Box::new(b))
    }

    pub fn variables(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<VarName>) {
        match self {
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Not(e) => e.collect_vars(out),
            Expr::And(a, b) | Expr::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Evaluates with a variable lookup.
    pub fn eval(&self, lookup: &dyn Fn(&VarName) -> bool) -> bool {
        match self {
            Expr::Var(v) => lookup(v),
            Expr::Not(e) => !e.eval(lookup),
            Expr::And(a, b) => a.eval(lookup) && b.eval(lookup),
            Expr::Or(a, b) => a.eval(lookup) || b.eval(lookup),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Or(..) => 1,
            Expr::And(..) => 2,
            Expr::Not(_) => 3,
            Expr::Var(_) => 4,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let parens = self.precedence() < min;
        if parens {
            f.write_str("(")?;
        }
        match self {
            Expr::Var(v) => write!(f, "{v}")?,
            Expr::Not(e) => {
                f.write_str("not ")?;
                e.fmt_prec(f, 3)?;
            }
            // Binary operators parse left-associatively, so a right operand
            // of the same precedence needs parentheses.
            Expr::And(a, b) => {
                a.fmt_prec(f, 2)?;
                f.write_str(" and ")?;
                b.fmt_prec(f, 3)?;
            }
            Expr::Or(a, b) => {
                a.fmt_prec(f, 1)?;
                f.write_str(" or ")?;
                b.fmt_prec(f, 2)?;
            }
        }
        if parens {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Expression with variables replaced by slot indices.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Compiled {
    Var(usize),
    Not(Box<Compiled>),
    And(Box<Compiled>, Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
}

impl Compiled {
    fn eval(&self, values: &[bool]) -> bool {
        match self {
            Compiled::Var(i) => values[*i],
            Compiled::Not(e) => !e.eval(values),
            Compiled::And(a, b) => a.eval(values) && b.eval(values),
            Compiled::Or(a, b) => a.eval(values) || b.eval(values),
        }
    }
}

fn compile(e: &Expr, slots: &BTreeMap<VarName, usize>) -> Compiled {
    match e {
        Expr::Var(v) => Compiled::Var(slots[v]),
        Expr::Not(x) => Compiled::Not(Box::new(compile(x, slots))),
        Expr::And(a, b) => Compiled::And(Box::new(compile(a, slots)), Box::new(compile(b, slots))),
        Expr::Or(a, b) => Compiled::Or(Box::new(compile(a, slots)), Box::new(compile(b, slots))),
    }
}

/// Boolean structural model with exogenous values, acyclic equations and
/// mappings from variables to events and components.
#[derive(Debug, Clone)]
pub struct StructuralModel {
    exogenous: BTreeMap<VarName, bool>,
    equations: BTreeMap<VarName, Expr>,
    event_map: BTreeMap<VarName, EntityId>,
    component_map: BTreeMap<VarName, EntityId>,
    // Derived on construction.
    slots: BTreeMap<VarName, usize>,
    names: Vec<VarName>,
    order: Vec<(usize, Compiled)>,
}

impl PartialEq for StructuralModel {
    fn eq(&self, other: &Self) -> bool {
        self.exogenous == other.exogenous
            && self.equations == other.equations
            && self.event_map == other.event_map
            && self.component_map == other.component_map
    }
}

impl Eq for StructuralModel {}

impl StructuralModel {
    pub fn new(
        exogenous: BTreeMap<VarName, bool>,
        equations: BTreeMap<VarName, Expr>,
        event_map: BTreeMap<VarName, EntityId>,
        component_map: BTreeMap<VarName, EntityId>,
    ) -> Result<Self, Vec<ModelError>> {
        let mut errors = Vec::new();
        for v in exogenous.keys().chain(equations.keys()) {
            if RESERVED.contains(&v.as_str()) {
                errors.push(ModelError::ReservedVariable { name: v.to_string() });
            }
        }
        for v in exogenous.keys() {
            if equations.contains_key(v) {
                errors.push(ModelError::DuplicateVariable { name: v.to_string() });
            }
        }
        let defined = |v: &VarName| exogenous.contains_key(v) || equations.contains_key(v);
        let mut unknown = BTreeSet::new();
        for e in equations.values() {
            unknown.extend(e.variables().into_iter().filter(|v| !defined(v)));
        }
        unknown.extend(event_map.keys().chain(component_map.keys()).filter(|v| !defined(v)).cloned());
        errors.extend(unknown.into_iter().map(|v| ModelError::UnknownVariable { name: v.to_string() }));
        errors.extend(injectivity(&event_map, "structural event map"));
        errors.extend(injectivity(&component_map, "structural component map"));

        let count = exogenous.len() + equations.len();
        if count > MAX_VARIABLES {
            errors.push(ModelError::TooManyVariables { count, max: MAX_VARIABLES });
        }
        if !errors.is_empty() {
            return Err(errors);
        }

        let names: Vec<VarName> = exogenous.keys().chain(equations.keys()).cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let slots: BTreeMap<VarName, usize> =
            names.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let topo = topological_order(&equations).map_err(|vars| {
            vec![ModelError::CyclicModel { vars: vars.iter().map(|v| v.to_string()).collect() }]
        })?;
        let order = topo
            .into_iter()
            .map(|v| (slots[&v], compile(&equations[&v], &slots)))
            .collect();
        Ok(StructuralModel { exogenous, equations, event_map, component_map, slots, names, order })
    }

    /// Builds from the lines of a `structural { ... }` block.
    pub fn from_items(items: &[StructItem]) -> Result<Self, Vec<ModelError>> {
        let mut exogenous = BTreeMap::new();
        let mut equations = BTreeMap::new();
        let mut event_map = BTreeMap::new();
        let mut component_map = BTreeMap::new();
        let mut errors = Vec::new();
        for item in items {
            match item {
                StructItem::Exo(v, b) => {
                    if exogenous.insert(v.clone(), *b).is_some() {
                        errors.push(ModelError::DuplicateVariable { name: v.to_string() });
                    }
                }
                StructItem::Eq(v, e) => {
                    if equations.insert(v.clone(), e.clone()).is_some() {
                        errors.push(ModelError::DuplicateVariable { name: v.to_string() });
                    }
                }
                StructItem::MapEvent(v, e) => {
                    if event_map.insert(v.clone(), e.clone()).is_some_and(|old| old != *e) {
                        errors.push(ModelError::FunctionConflict {
                            relation: "structural event map",
                            key: v.to_string(),
                        });
                    }
                }
                StructItem::MapComponent(v, c) => {
                    if component_map.insert(v.clone(), c.clone()).is_some_and(|old| old != *c) {
                        errors.push(ModelError::FunctionConflict {
                            relation: "structural component map",
                            key: v.to_string(),
                        });
                    }
                }
            }
        }
        match StructuralModel::new(exogenous, equations, event_map, component_map) {
            Ok(sm) if errors.is_empty() => Ok(sm),
            Ok(_) => Err(errors),
            Err(more) => {
                errors.extend(more);
                Err(errors)
            }
        }
    }

    pub fn exogenous(&self) -> &BTreeMap<VarName, bool> {
        &self.exogenous
    }
    pub fn equations(&self) -> &BTreeMap<VarName, Expr> {
        &self.equations
    }
    pub fn event_map(&self) -> &BTreeMap<VarName, EntityId> {
        &self.event_map
    }
    pub fn component_map(&self) -> &BTreeMap<VarName, EntityId> {
        &self.component_map
    }
    pub fn variable_count(&self) -> usize {
        self.names.len()
    }

    /// Canonical structural-block lines: exo, eq, then maps, each sorted.
    pub fn items(&self) -> Vec<StructItem> {
        let mut items: Vec<StructItem> = Vec::new();
        items.extend(self.exogenous.iter().map(|(v, b)| StructItem::Exo(v.clone(), *b)));
        items.extend(self.equations.iter().map(|(v, e)| StructItem::Eq(v.clone(), e.clone())));
        items.extend(self.component_map.iter().map(|(v, c)| StructItem::MapComponent(v.clone(), c.clone())));
        items.extend(self.event_map.iter().map(|(v, e)| StructItem::MapEvent(v.clone(), e.clone())));
        items
    }

    /// Slot-level evaluation. `overrides[i] = Some(b)` cuts variable `i` from
    /// its equation and fixes it to `b`.
    fn eval_slots(&self, overrides: &[Option<bool>]) -> Vec<bool> {
        let mut values = vec![false; self.names.len()];
        for (v, b) in &self.exogenous {
            values[self.slots[v]] = *b;
        }
        for (i, o) in overrides.iter().enumerate() {
            if let Some(b) = o {
                values[i] = *b;
            }
        }
        for (slot, expr) in &self.order {
            if overrides[*slot].is_none() {
                values[*slot] = expr.eval(&values);
            }
        }
        values
    }

    /// Evaluates every variable under the given interventions.
    pub fn evaluate(
        &self,
        overrides: &BTreeMap<VarName, bool>,
    ) -> Result<BTreeMap<VarName, bool>, CausalityError> {
        let mut slots = vec![None; self.names.len()];
        for (v, b) in overrides {
            let i = *self
                .slots
                .get(v)
                .ok_or_else(|| CausalityError::UnknownVariable(v.to_string()))?;
            slots[i] = Some(*b);
        }
        let values = self.eval_slots(&slots);
        Ok(self.names.iter().cloned().zip(values).collect())
    }

    /// Event variable slot, checking that the event occurs without intervention.
    fn event_slot(&self, event: &EntityId) -> Result<(usize, Vec<bool>), CausalityError> {
        let var = self
            .event_map
            .iter()
            .find(|(_, e)| *e == event)
            .map(|(v, _)| v)
            .ok_or_else(|| CausalityError::EventNotMapped(event.to_string()))?;
        let slot = self.slots[var];
        let actual = self.eval_slots(&vec![None; self.names.len()]);
        if !actual[slot] {
            return Err(CausalityError::EventNotOccurring(event.to_string()));
        }
        Ok((slot, actual))
    }

    /// Component-mapped variables as (slot, component), sorted by component.
    fn candidates(&self) -> Vec<(usize, EntityId)> {
        let mut c: Vec<_> =
            self.component_map.iter().map(|(v, c)| (self.slots[v], c.clone())).collect();
        c.sort_by(|a, b| a.1.cmp(&b.1));
        c
    }

    fn flips_outcome(&self, event_slot: usize, actual: &[bool], flipped: &[usize]) -> bool {
        let mut overrides = vec![None; self.names.len()];
        for &s in flipped {
            overrides[s] = Some(!actual[s]);
        }
        !self.eval_slots(&overrides)[event_slot]
    }

    /// Components whose variable, flipped alone, makes the event false.
    pub fn but_for_causes(&self, event: &EntityId) -> Result<ComponentSet, CausalityError> {
        let (slot, actual) = self.event_slot(event)?;
        Ok(self
            .candidates()
            .into_iter()
            .filter(|(s, _)| self.flips_outcome(slot, &actual, &[*s]))
            .map(|(_, c)| c)
            .collect())
    }

    /// All inclusion-minimal sets of component variables whose joint flip
    /// makes the event false, sorted by size then lexicographically.
    pub fn minimal_cause_sets(&self, event: &EntityId) -> Result<Vec<ComponentSet>, CausalityError> {
        let (slot, actual) = self.event_slot(event)?;
        let candidates = self.candidates();
        let n = candidates.len();
        if n > MAX_SEARCH_VARIABLES {
            return Err(CausalityError::SearchSpaceTooLarge { count: n, max: MAX_SEARCH_VARIABLES });
        }
        // Masks are over positions in `candidates`, which are sorted by
        // component name, so lexicographic order on the masks' members
        // matches lexicographic order on component sets.
        let mut found: Vec<u32> = Vec::new();
        for size in 1..=n {
            let mut level = Vec::new();
            for mask in masks_of_size(n, size) {
                if found.iter().any(|m| m & mask == *m) {
                    continue;
                }
                let flipped: Vec<usize> =
                    (0..n).filter(|i| mask & (1 << i) != 0).map(|i| candidates[i].0).collect();
                if self.flips_outcome(slot, &actual, &flipped) {
                    level.push(mask);
                }
            }
            found.extend(level);
        }
        let mut sets: Vec<ComponentSet> = found
            .into_iter()
            .map(|mask| {
                (0..n).filter(|i| mask & (1 << i) != 0).map(|i| candidates[i].1.clone()).collect()
            })
            .collect();
        sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.iter().cmp(b.iter())));
        Ok(sets)
    }

    /// But-for causes and minimal sets together.
    pub fn cause_result(&self, event: &EntityId) -> Result<CauseResult, CausalityError> {
        Ok(CauseResult {
            event: event.clone(),
            but_for: self.but_for_causes(event)?,
            minimal_sets: self.minimal_cause_sets(event)?,
            source: CauseSource::Computed,
        })
    }
}

fn injectivity(map: &BTreeMap<VarName, EntityId>, relation: &'static str) -> Vec<ModelError> {
    let mut seen: BTreeMap<&EntityId, usize> = BTreeMap::new();
    for target in map.values() {
        *seen.entry(target).or_default() += 1;
    }
    seen.into_iter()
        .filter(|(_, n)| *n > 1)
        .map(|(t, _)| ModelError::FunctionConflict { relation, key: t.to_string() })
        .collect()
}

/// Kahn's algorithm over equation dependencies; ties broken by name so the
/// order is deterministic. On a cycle, returns the variables left over.
fn topological_order(equations: &BTreeMap<VarName, Expr>) -> Result<Vec<VarName>, Vec<VarName>> {
    let deps: BTreeMap<&VarName, BTreeSet<VarName>> = equations
        .iter()
        .map(|(v, e)| (v, e.variables().into_iter().filter(|d| equations.contains_key(d)).collect()))
        .collect();
    let mut done: BTreeSet<VarName> = BTreeSet::new();
    let mut order = Vec::new();
    loop {
        let ready: Vec<VarName> = deps
            .iter()
            .filter(|(v, d)| !done.contains(**v) && d.iter().all(|x| done.contains(x)))
            .map(|(v, _)| (*v).clone())
            .collect();
        if ready.is_empty() {
            break;
        }
        for v in ready {
            done.insert(v.clone());
            order.push(v);
        }
    }
    if order.len() == equations.len() {
        Ok(order)
    } else {
        Err(equations.keys().filter(|v| !done.contains(*v)).cloned().collect())
    }
}

/// All `n`-bit masks with exactly `k` bits set, in lexicographic order of
/// their member positions.
fn masks_of_size(n: usize, k: usize) -> Vec<u32> {
    fn rec(start: usize, n: usize, k: usize, acc: u32, out: &mut Vec<u32>) {
        if k == 0 {
            out.push(acc);
            return;
        }
        for i in start..=n - k {
            rec(i + 1, n, k - 1, acc | (1 << i), out);
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, 0, &mut out);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CauseSource {
    Explicit,
    Computed,
}

/// Computed causes of one event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CauseResult {
    pub event: EntityId,
    pub but_for: ComponentSet,
    pub minimal_sets: Vec<ComponentSet>,
    pub source: CauseSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CausalityError {
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("unknown structural variable `{0}`")]
    UnknownVariable(String),
    #[error("event `{0}` is not mapped to any structural variable")]
    EventNotMapped(String),
    #[error("event `{0}` does not occur in the structural model")]
    EventNotOccurring(String),
    #[error("{count} component variables exceed the search bound of {max}")]
    SearchSpaceTooLarge { count: usize, max: usize },
    #[error("the model has no structural block")]
    NoStructuralModel,
}

/// Explicitly declared causes, if any.
pub fn explicit_causes(model: &Model, event: &EntityId) -> Result<Option<ComponentSet>, CausalityError> {
    if !model.has_event(event) {
        return Err(CausalityError::UnknownEvent(event.to_string()));
    }
    Ok(model.caused_facts().get(event).cloned())
}

/// Causes computed from the model's structural block.
pub fn computed_causes(model: &Model, event: &EntityId) -> Result<CauseResult, CausalityError> {
    if !model.has_event(event) {
        return Err(CausalityError::UnknownEvent(event.to_string()));
    }
    model.structural().ok_or(CausalityError::NoStructuralModel)?.cause_result(event)
}

/// Both cause sources for one event, as reported by the CLI.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CauseLookup {
    pub event: EntityId,
    pub explicit: Option<ComponentSet>,
    pub computed: Option<CauseResult>,
    /// Why no computed result is available.
    pub computed_error: Option<String>,
    /// Both sources present and the explicit set differs from the but-for set.
    pub conflict: bool,
}

impl CauseLookup {
    /// Causes to use for `caused(e)`: explicit facts first, then the but-for set.
    pub fn effective(&self) -> Option<(&ComponentSet, CauseSource)> {
        match (&self.explicit, &self.computed) {
            (Some(set), _) => Some((set, CauseSource::Explicit)),
            (None, Some(r)) => Some((&r.but_for, CauseSource::Computed)),
            (None, None) => None,
        }
    }
}

pub fn lookup_causes(model: &Model, event: &EntityId) -> Result<CauseLookup, CausalityError> {
    let explicit = explicit_causes(model, event)?;
    let (computed, computed_error) = match computed_causes(model, event) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let conflict = matches!((&explicit, &computed), (Some(x), Some(c)) if *x != c.but_for);
    Ok(CauseLookup { event: event.clone(), explicit, computed, computed_error, conflict })
}
