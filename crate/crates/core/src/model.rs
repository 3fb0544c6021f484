//! Domain types and the validated, immutable [`Model`].
//!
//! A model is assembled from a flat list of [`Declaration`]s by
//! [`build_model`]. Construction is all-or-nothing: either every
//! referential-integrity rule holds and an immutable `Model` comes back, or
//! the complete list of problems is returned so a scenario author can fix
//! them in one pass.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::causality::{Expr, StructuralModel};

/// Identifier of a declared entity, CPS or structural variable.
///
/// Always matches `[A-Za-z_][A-Za-z0-9_]*`. Comparison is case-sensitive.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct EntityId(String);

impl EntityId {
    pub fn new(name: impl Into<String>) -> Result<Self, ModelError> {
        let name = name.into();
        if is_identifier(&name) {
            Ok(EntityId(name))
        } else {
            Err(ModelError::InvalidIdentifier { name })
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl std::str::FromStr for EntityId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EntityId::new(s)
    }
}

/// Sorted, duplicate-free sets of ids. Iteration order is lexicographic.
pub type IdSet = BTreeSet<EntityId>;
pub type PrincipalSet = IdSet;
pub type ComponentSet = IdSet;
pub type EventSet = IdSet;
pub type VarName = EntityId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PrincipalKind {
    Person,
    LegalEntity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BeingKind {
    Human,
    Animal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    System,
    Environment,
}

/// Namespace a name is declared under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Component,
    Principal,
    Being,
    Event,
    Account,
    Action,
    Cps,
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EntityKind::Component => "component",
            EntityKind::Principal => "principal",
            EntityKind::Being => "being",
            EntityKind::Event => "event",
            EntityKind::Account => "account",
            EntityKind::Action => "action",
            EntityKind::Cps => "cps",
        };
        f.write_str(s)
    }
}

/// `(event, component) ↦ account`: the event about the component is recorded
/// in the account.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ObservationFact {
    pub event: EntityId,
    pub component: EntityId,
    pub account: EntityId,
}

impl ObservationFact {
    pub fn new(event: EntityId, component: EntityId, account: EntityId) -> Self {
        ObservationFact { event, component, account }
    }
}

impl fmt::Display for ObservationFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}) -> {}", self.event, self.component, self.account)
    }
}

/// One cyber-physical system: its components, principals, setups and the
/// observations aggregated into its logical account.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CpsDecl {
    pub id: EntityId,
    pub components: ComponentSet,
    pub principals: PrincipalSet,
    /// Component → configuring principal.
    pub setups: BTreeMap<EntityId, EntityId>,
    pub logs: BTreeSet<ObservationFact>,
}

impl CpsDecl {
    pub fn new(id: EntityId) -> Self {
        CpsDecl {
            id,
            components: BTreeSet::new(),
            principals: BTreeSet::new(),
            setups: BTreeMap::new(),
            logs: BTreeSet::new(),
        }
    }

    /// Components mentioned by the logs, `ran(dom(logs))`.
    pub fn logged_components(&self) -> ComponentSet {
        self.logs.iter().map(|o| o.component.clone()).collect()
    }

    /// Events mentioned by the logs, `dom(dom(logs))`.
    pub fn logged_events(&self) -> EventSet {
        self.logs.iter().map(|o| o.event.clone()).collect()
    }

    /// Accounts the logs are written to, `ran(logs)`.
    pub fn log_accounts(&self) -> IdSet {
        self.logs.iter().map(|o| o.account.clone()).collect()
    }
}

/// The socio-technical system seen from the ego CPS.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StsDecl {
    pub ego: EntityId,
    pub foreign: Vec<EntityId>,
    pub principals: PrincipalSet,
    pub beings: IdSet,
}

/// Accountability-mechanism state that is not derivable from the base
/// relations.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct MechanismDecl {
    pub accounts: IdSet,
    /// User-asserted `missedByEgo`; checked against the computed value.
    pub missed_by_ego: Option<EventSet>,
}

/// One line of a structural block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructItem {
    Exo(VarName, bool),
    Eq(VarName, Expr),
    MapEvent(VarName, EntityId),
    MapComponent(VarName, EntityId),
}

/// Raw declarations as produced by the scenario parser or by hand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Declaration {
    Scenario(String),
    Component(EntityId),
    Principal(EntityId, PrincipalKind),
    Being(EntityId, BeingKind),
    Event(EntityId, EventKind),
    Account(EntityId),
    Action(EntityId),
    Cps(CpsDecl),
    Ego(EntityId),
    StsPrincipals(Vec<EntityId>),
    StsBeings(Vec<EntityId>),
    StsForeign(Vec<EntityId>),
    MechanismAccounts(Vec<EntityId>),
    MissedByEgo(Vec<EntityId>),
    /// Global component configuration: component set up by principal.
    Setup(EntityId, EntityId),
    Observation(ObservationFact),
    /// Account held by principal.
    HasAccount(EntityId, EntityId),
    /// `(principal, component) ↦ action`.
    Correction(EntityId, EntityId, EntityId),
    Caused(EntityId, Vec<EntityId>),
    Structural(Vec<StructItem>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid identifier {name:?}")]
    InvalidIdentifier { name: String },
    #[error("unknown {expected} `{name}` in {context}")]
    UnknownEntity { name: String, expected: EntityKind, context: String },
    #[error("`{name}` is declared more than once")]
    DuplicateDeclaration { name: String },
    #[error("`{name}` is declared both as {first} and as {second}")]
    KindConflict { name: String, first: EntityKind, second: EntityKind },
    #[error("caused set for event `{event}` is empty")]
    EmptyCausedSet { event: String },
    #[error("{relation} maps `{key}` to more than one value")]
    FunctionConflict { relation: &'static str, key: String },
    #[error("cps blocks are declared but no `ego` statement designates the ego system")]
    MissingEgo,
    #[error("ego names `{name}`, which is not a declared cps")]
    EgoUnknown { name: String },
    #[error("structural variable `{name}` is not defined")]
    UnknownVariable { name: String },
    #[error("structural variable `{name}` is defined more than once")]
    DuplicateVariable { name: String },
    #[error("structural variable `{name}` is a reserved word")]
    ReservedVariable { name: String },
    #[error("structural equations are cyclic through {}", .vars.join(", "))]
    CyclicModel { vars: Vec<String> },
    #[error("structural model has {count} variables (at most {max})")]
    TooManyVariables { count: usize, max: usize },
}

/// A [`ModelError`] tied to the source line it came from, when known.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct BuildError {
    pub line: Option<u32>,
    pub error: ModelError,
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.error),
            None => write!(f, "{}", self.error),
        }
    }
}

/// The complete resolved universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub(crate) name: String,
    pub(crate) components: ComponentSet,
    pub(crate) principals: BTreeMap<EntityId, PrincipalKind>,
    pub(crate) beings: BTreeMap<EntityId, BeingKind>,
    pub(crate) events: BTreeMap<EntityId, EventKind>,
    pub(crate) accounts: IdSet,
    pub(crate) actions: IdSet,
    pub(crate) observations: BTreeSet<ObservationFact>,
    pub(crate) configuration: BTreeMap<EntityId, EntityId>,
    pub(crate) has_account: BTreeSet<(EntityId, EntityId)>,
    pub(crate) corrections: BTreeMap<(EntityId, EntityId), EntityId>,
    pub(crate) caused: BTreeMap<EntityId, ComponentSet>,
    pub(crate) cps: BTreeMap<EntityId, CpsDecl>,
    pub(crate) sts: Option<StsDecl>,
    pub(crate) mechanism: MechanismDecl,
    pub(crate) structural: Option<StructuralModel>,
}

impl Model {
    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn components(&self) -> &ComponentSet {
        &self.components
    }
    pub fn principals(&self) -> &BTreeMap<EntityId, PrincipalKind> {
        &self.principals
    }
    pub fn beings(&self) -> &BTreeMap<EntityId, BeingKind> {
        &self.beings
    }
    pub fn events(&self) -> &BTreeMap<EntityId, EventKind> {
        &self.events
    }
    pub fn accounts(&self) -> &IdSet {
        &self.accounts
    }
    pub fn actions(&self) -> &IdSet {
        &self.actions
    }
    /// The global `Observation` relation.
    pub fn observations(&self) -> &BTreeSet<ObservationFact> {
        &self.observations
    }
    /// `ComponentConfiguration`: component → principal.
    pub fn component_configuration(&self) -> &BTreeMap<EntityId, EntityId> {
        &self.configuration
    }
    /// `hasAccount` as `(account, principal)` pairs.
    pub fn has_account(&self) -> &BTreeSet<(EntityId, EntityId)> {
        &self.has_account
    }
    /// `correctionAction`: `(principal, component)` → action.
    pub fn correction_actions(&self) -> &BTreeMap<(EntityId, EntityId), EntityId> {
        &self.corrections
    }
    /// Explicit `caused` facts.
    pub fn caused_facts(&self) -> &BTreeMap<EntityId, ComponentSet> {
        &self.caused
    }
    pub fn cps(&self) -> &BTreeMap<EntityId, CpsDecl> {
        &self.cps
    }
    pub fn sts(&self) -> Option<&StsDecl> {
        self.sts.as_ref()
    }
    pub fn ego(&self) -> Option<&CpsDecl> {
        self.sts.as_ref().and_then(|s| self.cps.get(&s.ego))
    }
    pub fn mechanism(&self) -> &MechanismDecl {
        &self.mechanism
    }
    pub fn structural(&self) -> Option<&StructuralModel> {
        self.structural.as_ref()
    }

    pub fn has_component(&self, id: &EntityId) -> bool {
        self.components.contains(id)
    }
    pub fn has_event(&self, id: &EntityId) -> bool {
        self.events.contains_key(id)
    }

    /// Foreign CPS order used when no explicit `sts foreign` is given.
    pub(crate) fn default_foreign(cps: &BTreeMap<EntityId, CpsDecl>, ego: &EntityId) -> Vec<EntityId> {
        cps.keys().filter(|id| *id != ego).cloned().collect()
    }
}

/// Builds a model from declarations without source locations.
pub fn build_model(
    declarations: impl IntoIterator<Item = Declaration>,
) -> Result<Model, Vec<BuildError>> {
    build_model_located(declarations.into_iter().map(|d| (d, None)))
}

/// Builds a model from declarations tagged with their source line.
pub fn build_model_located(
    declarations: impl IntoIterator<Item = (Declaration, Option<u32>)>,
) -> Result<Model, Vec<BuildError>> {
    let declarations: Vec<_> = declarations.into_iter().collect();
    let mut b = Builder::default();
    b.register(&declarations);
    b.resolve(&declarations);
    if b.errors.is_empty() {
        Ok(b.finish())
    } else {
        let mut errors = b.errors;
        errors.sort_by(|a, b| {
            (a.line, a.error.to_string()).cmp(&(b.line, b.error.to_string()))
        });
        errors.dedup();
        Err(errors)
    }
}

fn set_once<T>(slot: &mut Option<T>, value: T) -> bool {
    if slot.is_some() {
        return false;
    }
    *slot = Some(value);
    true
}

#[derive(Default)]
struct Builder {
    errors: Vec<BuildError>,
    line: Option<u32>,
    kinds: BTreeMap<EntityId, EntityKind>,

    name: Option<String>,
    components: ComponentSet,
    principals: BTreeMap<EntityId, PrincipalKind>,
    beings: BTreeMap<EntityId, BeingKind>,
    events: BTreeMap<EntityId, EventKind>,
    accounts: IdSet,
    actions: IdSet,
    observations: BTreeSet<ObservationFact>,
    configuration: BTreeMap<EntityId, EntityId>,
    has_account: BTreeSet<(EntityId, EntityId)>,
    corrections: BTreeMap<PairKey, EntityId>,
    caused: BTreeMap<EntityId, ComponentSet>,
    cps: BTreeMap<EntityId, CpsDecl>,
    ego: Option<EntityId>,
    sts_principals: Option<PrincipalSet>,
    sts_beings: Option<IdSet>,
    sts_foreign: Option<Vec<EntityId>>,
    mech_accounts: Option<IdSet>,
    missed_by_ego: Option<EventSet>,
    structural: Option<StructuralModel>,
    seen_structural: bool,
}

impl Builder {
    fn error(&mut self, error: ModelError) {
        self.errors.push(BuildError { line: self.line, error });
    }

    fn declare(&mut self, id: &EntityId, kind: EntityKind) -> bool {
        match self.kinds.get(id) {
            None => {
                self.kinds.insert(id.clone(), kind);
                true
            }
            Some(&k) if k == kind => {
                self.error(ModelError::DuplicateDeclaration { name: id.to_string() });
                false
            }
            Some(&k) => {
                let (first, second) = if k < kind { (k, kind) } else { (kind, k) };
                self.error(ModelError::KindConflict { name: id.to_string(), first, second });
                false
            }
        }
    }

    /// Pass one: every named entity and every singleton statement.
    fn register(&mut self, declarations: &[(Declaration, Option<u32>)]) {
        for (decl, line) in declarations {
            self.line = *line;
            match decl {
                Declaration::Scenario(name) => {
                    if self.name.is_some() {
                        self.error(ModelError::DuplicateDeclaration { name: "scenario".into() });
                    } else {
                        self.name = Some(name.clone());
                    }
                }
                Declaration::Component(id) => {
                    if self.declare(id, EntityKind::Component) {
                        self.components.insert(id.clone());
                    }
                }
                Declaration::Principal(id, kind) => {
                    if self.declare(id, EntityKind::Principal) {
                        self.principals.insert(id.clone(), *kind);
                    }
                }
                Declaration::Being(id, kind) => {
                    if self.declare(id, EntityKind::Being) {
                        self.beings.insert(id.clone(), *kind);
                    }
                }
                Declaration::Event(id, kind) => {
                    if self.declare(id, EntityKind::Event) {
                        self.events.insert(id.clone(), *kind);
                    }
                }
                Declaration::Account(id) => {
                    if self.declare(id, EntityKind::Account) {
                        self.accounts.insert(id.clone());
                    }
                }
                Declaration::Action(id) => {
                    if self.declare(id, EntityKind::Action) {
                        self.actions.insert(id.clone());
                    }
                }
                Declaration::Cps(cps) => {
                    self.declare(&cps.id, EntityKind::Cps);
                }
                Declaration::Ego(id) => {
                    if !set_once(&mut self.ego, id.clone()) {
                        self.error(ModelError::DuplicateDeclaration { name: "ego".into() });
                    }
                }
                Declaration::StsPrincipals(ids) => {
                    if !set_once(&mut self.sts_principals, ids.iter().cloned().collect()) {
                        self.error(ModelError::DuplicateDeclaration { name: "sts principals".into() });
                    }
                }
                Declaration::StsBeings(ids) => {
                    if !set_once(&mut self.sts_beings, ids.iter().cloned().collect()) {
                        self.error(ModelError::DuplicateDeclaration { name: "sts beings".into() });
                    }
                }
                Declaration::StsForeign(ids) => {
                    if !set_once(&mut self.sts_foreign, ids.clone()) {
                        self.error(ModelError::DuplicateDeclaration { name: "sts foreign".into() });
                    }
                }
                Declaration::MechanismAccounts(ids) => {
                    if !set_once(&mut self.mech_accounts, ids.iter().cloned().collect()) {
                        self.error(ModelError::DuplicateDeclaration {
                            name: "mechanism accounts".into(),
                        });
                    }
                }
                Declaration::MissedByEgo(ids) => {
                    if !set_once(&mut self.missed_by_ego, ids.iter().cloned().collect()) {
                        self.error(ModelError::DuplicateDeclaration {
                            name: "mechanism missed_by_ego".into(),
                        });
                    }
                }
                Declaration::Structural(_) => {
                    if self.seen_structural {
                        self.error(ModelError::DuplicateDeclaration { name: "structural".into() });
                    }
                    self.seen_structural = true;
                }
                _ => {}
            }
        }
    }

    fn expect(&mut self, id: &EntityId, kind: EntityKind, context: &dyn Fn() -> String) -> bool {
        if self.kinds.get(id) == Some(&kind) {
            true
        } else {
            self.error(ModelError::UnknownEntity {
                name: id.to_string(),
                expected: kind,
                context: context(),
            });
            false
        }
    }

    fn insert_function<K: Ord + Clone + fmt::Display, V: PartialEq + Clone>(
        map: &mut BTreeMap<K, V>,
        key: K,
        value: V,
        relation: &'static str,
    ) -> Result<(), ModelError> {
        match map.get(&key) {
            Some(existing) if *existing != value => {
                Err(ModelError::FunctionConflict { relation, key: key.to_string() })
            }
            Some(_) => Ok(()),
            None => {
                map.insert(key, value);
                Ok(())
            }
        }
    }

    fn add_setup(&mut self, component: &EntityId, principal: &EntityId) {
        if let Err(e) = Self::insert_function(
            &mut self.configuration,
            component.clone(),
            principal.clone(),
            "component configuration",
        ) {
            self.error(e);
        }
    }

    fn check_observation(&mut self, o: &ObservationFact, context: &dyn Fn() -> String) -> bool {
        let a = self.expect(&o.event, EntityKind::Event, context);
        let b = self.expect(&o.component, EntityKind::Component, context);
        let c = self.expect(&o.account, EntityKind::Account, context);
        a && b && c
    }

    /// Pass two: facts, with reference checks against pass one.
    fn resolve(&mut self, declarations: &[(Declaration, Option<u32>)]) {
        for (decl, line) in declarations {
            self.line = *line;
            match decl {
                Declaration::Cps(cps) => self.resolve_cps(cps),
                Declaration::Setup(c, p) => {
                    let ctx = || format!("setup {c} by {p}");
                    let ok = self.expect(c, EntityKind::Component, &ctx)
                        & self.expect(p, EntityKind::Principal, &ctx);
                    if ok {
                        self.add_setup(c, p);
                    }
                }
                Declaration::Observation(o) => {
                    if self.check_observation(o, &|| format!("observation {o}")) {
                        self.observations.insert(o.clone());
                    }
                }
                Declaration::HasAccount(a, p) => {
                    let ctx = || format!("has_account {a} by {p}");
                    let ok = self.expect(a, EntityKind::Account, &ctx)
                        & self.expect(p, EntityKind::Principal, &ctx);
                    if ok {
                        self.has_account.insert((a.clone(), p.clone()));
                    }
                }
                Declaration::Correction(p, c, act) => {
                    let ctx = || format!("correction ({p}, {c}) -> {act}");
                    let ok = self.expect(p, EntityKind::Principal, &ctx)
                        & self.expect(c, EntityKind::Component, &ctx)
                        & self.expect(act, EntityKind::Action, &ctx);
                    if ok {
                        if let Err(e) = Self::insert_function(
                            &mut self.corrections,
                            PairKey(p.clone(), c.clone()),
                            act.clone(),
                            "correction action",
                        ) {
                            self.error(e);
                        }
                    }
                }
                Declaration::Caused(e, comps) => {
                    let ctx = || format!("caused {e}");
                    let mut ok = self.expect(e, EntityKind::Event, &ctx);
                    for c in comps {
                        ok &= self.expect(c, EntityKind::Component, &ctx);
                    }
                    if comps.is_empty() {
                        self.error(ModelError::EmptyCausedSet { event: e.to_string() });
                        ok = false;
                    }
                    if ok {
                        let set: ComponentSet = comps.iter().cloned().collect();
                        if let Err(err) =
                            Self::insert_function(&mut self.caused, e.clone(), set, "caused")
                        {
                            self.error(err);
                        }
                    }
                }
                Declaration::Ego(id) => {
                    if self.kinds.get(id) != Some(&EntityKind::Cps) {
                        self.error(ModelError::EgoUnknown { name: id.to_string() });
                    }
                }
                Declaration::StsPrincipals(ids) => {
                    for id in ids {
                        self.expect(id, EntityKind::Principal, &|| "sts principals".into());
                    }
                }
                Declaration::StsBeings(ids) => {
                    for id in ids {
                        self.expect(id, EntityKind::Being, &|| "sts beings".into());
                    }
                }
                Declaration::StsForeign(ids) => {
                    for id in ids {
                        self.expect(id, EntityKind::Cps, &|| "sts foreign".into());
                    }
                }
                Declaration::MechanismAccounts(ids) => {
                    for id in ids {
                        self.expect(id, EntityKind::Account, &|| "mechanism accounts".into());
                    }
                }
                Declaration::MissedByEgo(ids) => {
                    for id in ids {
                        self.expect(id, EntityKind::Event, &|| "mechanism missed_by_ego".into());
                    }
                }
                Declaration::Structural(items) => self.resolve_structural(items),
                _ => {}
            }
        }

        // STS statements are only meaningful with an ego system.
        self.line = None;
        let has_sts_overrides = self.sts_principals.is_some()
            || self.sts_beings.is_some()
            || self.sts_foreign.is_some()
            || self.missed_by_ego.is_some();
        if self.ego.is_none() && (!self.cps.is_empty() || has_sts_overrides) {
            self.error(ModelError::MissingEgo);
        }
    }

    fn resolve_cps(&mut self, cps: &CpsDecl) {
        let id = &cps.id;
        let mut ok = true;
        for c in &cps.components {
            ok &= self.expect(c, EntityKind::Component, &|| format!("cps {id} components"));
        }
        for p in &cps.principals {
            ok &= self.expect(p, EntityKind::Principal, &|| format!("cps {id} principals"));
        }
        for (c, p) in &cps.setups {
            let ctx = || format!("cps {id} setup {c} by {p}");
            ok &= self.expect(c, EntityKind::Component, &ctx);
            ok &= self.expect(p, EntityKind::Principal, &ctx);
        }
        for o in &cps.logs {
            ok &= self.check_observation(o, &|| format!("cps {id} log {o}"));
        }
        if !ok {
            return;
        }
        for (c, p) in &cps.setups {
            self.add_setup(c, p);
        }
        self.observations.extend(cps.logs.iter().cloned());
        if self.kinds.get(id) == Some(&EntityKind::Cps) && !self.cps.contains_key(id) {
            self.cps.insert(id.clone(), cps.clone());
        }
    }

    fn resolve_structural(&mut self, items: &[StructItem]) {
        for item in items {
            let (target, kind) = match item {
                StructItem::MapEvent(_, e) => (e, EntityKind::Event),
                StructItem::MapComponent(_, c) => (c, EntityKind::Component),
                _ => continue,
            };
            self.expect(target, kind, &|| "structural map".into());
        }
        match StructuralModel::from_items(items) {
            Ok(sm) => {
                if self.structural.is_none() {
                    self.structural = Some(sm);
                }
            }
            Err(errors) => {
                for e in errors {
                    self.error(e);
                }
            }
        }
    }

    fn finish(self) -> Model {
        let sts = self.ego.map(|ego| StsDecl {
            foreign: self
                .sts_foreign
                .unwrap_or_else(|| Model::default_foreign(&self.cps, &ego)),
            ego,
            principals: self
                .sts_principals
                .unwrap_or_else(|| self.principals.keys().cloned().collect()),
            beings: self.sts_beings.unwrap_or_else(|| self.beings.keys().cloned().collect()),
        });
        let mechanism = MechanismDecl {
            accounts: self.mech_accounts.unwrap_or_else(|| self.accounts.clone()),
            missed_by_ego: self.missed_by_ego,
        };
        Model {
            name: self.name.unwrap_or_default(),
            components: self.components,
            principals: self.principals,
            beings: self.beings,
            events: self.events,
            accounts: self.accounts,
            actions: self.actions,
            observations: self.observations,
            configuration: self.configuration,
            has_account: self.has_account,
            corrections: self.corrections.into_iter().map(|(k, v)| ((k.0, k.1), v)).collect(),
            caused: self.caused,
            cps: self.cps,
            sts,
            mechanism,
            structural: self.structural,
        }
    }
}

/// `(principal, component)` key with a readable `Display` for error messages.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct PairKey(EntityId, EntityId);

impl fmt::Display for PairKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> EntityId {
        EntityId::new(s).unwrap()
    }

    #[test]
    fn identifiers_follow_the_lexical_rule() {
        assert!(EntityId::new("LIDAR").is_ok());
        assert!(EntityId::new("_x9").is_ok());
        assert!(EntityId::new("9x").is_err());
        assert!(EntityId::new("").is_err());
        assert!(EntityId::new("a-b").is_err());
    }

    #[test]
    fn empty_declaration_list_builds_an_empty_model() {
        let m = build_model(vec![]).unwrap();
        assert!(m.components().is_empty());
        assert!(m.sts().is_none());
        assert_eq!(m.name(), "");
    }

    #[test]
    fn undeclared_component_in_a_log_is_reported() {
        let mut cps = CpsDecl::new(id("EGO"));
        cps.logs.insert(ObservationFact::new(id("E1"), id("C1"), id("A1")));
        let errs = build_model(vec![
            Declaration::Event(id("E1"), EventKind::System),
            Declaration::Account(id("A1")),
            Declaration::Cps(cps),
            Declaration::Ego(id("EGO")),
        ])
        .unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(matches!(
            &errs[0].error,
            ModelError::UnknownEntity { name, expected: EntityKind::Component, .. } if name == "C1"
        ));
    }

    #[test]
    fn all_errors_are_collected() {
        let errs = build_model(vec![
            Declaration::Component(id("X")),
            Declaration::Component(id("X")),
            Declaration::Account(id("Y")),
            Declaration::Principal(id("Y"), PrincipalKind::Person),
            Declaration::Event(id("E"), EventKind::System),
            Declaration::Caused(id("E"), vec![]),
            Declaration::HasAccount(id("NOPE"), id("P")),
        ])
        .unwrap_err();
        let kinds: Vec<_> = errs.iter().map(|e| &e.error).collect();
        assert!(kinds.iter().any(|e| matches!(e, ModelError::DuplicateDeclaration { name } if name == "X")));
        assert!(kinds.iter().any(|e| matches!(e, ModelError::KindConflict { name, .. } if name == "Y")));
        assert!(kinds.iter().any(|e| matches!(e, ModelError::EmptyCausedSet { event } if event == "E")));
        assert_eq!(
            kinds.iter().filter(|e| matches!(e, ModelError::UnknownEntity { .. })).count(),
            2
        );
    }

    #[test]
    fn conflicting_setups_are_rejected() {
        let errs = build_model(vec![
            Declaration::Component(id("C")),
            Declaration::Principal(id("P"), PrincipalKind::Person),
            Declaration::Principal(id("Q"), PrincipalKind::Person),
            Declaration::Setup(id("C"), id("P")),
            Declaration::Setup(id("C"), id("Q")),
        ])
        .unwrap_err();
        assert!(matches!(errs[0].error, ModelError::FunctionConflict { .. }));
    }

    #[test]
    fn cps_without_ego_is_missing_ego() {
        let errs = build_model(vec![Declaration::Cps(CpsDecl::new(id("EGO")))]).unwrap_err();
        assert_eq!(errs[0].error, ModelError::MissingEgo);
        let errs = build_model(vec![
            Declaration::Cps(CpsDecl::new(id("EGO"))),
            Declaration::Ego(id("OTHER")),
        ])
        .unwrap_err();
        assert_eq!(errs[0].error, ModelError::EgoUnknown { name: "OTHER".into() });
    }

    #[test]
    fn cps_logs_feed_global_observations_and_setups_feed_configuration() {
        let mut cps = CpsDecl::new(id("EGO"));
        cps.components.insert(id("C"));
        cps.principals.insert(id("P"));
        cps.setups.insert(id("C"), id("P"));
        cps.logs.insert(ObservationFact::new(id("E"), id("C"), id("A")));
        let m = build_model(vec![
            Declaration::Component(id("C")),
            Declaration::Principal(id("P"), PrincipalKind::LegalEntity),
            Declaration::Event(id("E"), EventKind::System),
            Declaration::Account(id("A")),
            Declaration::Cps(cps),
            Declaration::Ego(id("EGO")),
        ])
        .unwrap();
        assert_eq!(m.observations().len(), 1);
        assert_eq!(m.component_configuration().get(&id("C")), Some(&id("P")));
        let sts = m.sts().unwrap();
        assert!(sts.foreign.is_empty());
        assert_eq!(sts.principals, [id("P")].into_iter().collect());
        assert_eq!(m.mechanism().accounts, [id("A")].into_iter().collect());
    }
}
