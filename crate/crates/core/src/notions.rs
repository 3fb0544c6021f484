//! The three notions of accountability and their side-by-side comparison.
//!
//! - hall: a component is accountable when some principal is informed
//!   about it. Needs only observations and account ownership.
//! - lindberg: an informed principal that is also responsible for, or the
//!   constructor of, the component. Additionally needs correction actions
//!   and component configuration.
//! - raci: principals responsible for some component that caused the event.
//!   Additionally needs `caused`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::causality::{lookup_causes, CauseSource};
use crate::checks::{Severity, Violation};
use crate::model::{ComponentSet, EntityId, EventSet, Model, PrincipalSet};
use crate::relations::{
    informed_unchecked, require_component, responsible_unchecked, QueryError,
};

pub const RACI_UNIQ: &str = "RACI-UNIQ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Notion {
    Hall,
    Lindberg,
    Raci,
}

impl Notion {
    /// Interfaces a notion reads beyond the entity declarations.
    pub fn required_interfaces(self) -> &'static [&'static str] {
        match self {
            Notion::Hall => &["observation", "has_account"],
            Notion::Lindberg => {
                &["observation", "has_account", "correction_action|component_configuration"]
            }
            Notion::Raci => &["observation", "has_account", "correction_action", "caused"],
        }
    }
}

impl std::str::FromStr for Notion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hall" => Ok(Notion::Hall),
            "lindberg" => Ok(Notion::Lindberg),
            "raci" => Ok(Notion::Raci),
            other => Err(format!("unknown notion `{other}`")),
        }
    }
}

/// Components that some principal is informed about.
pub fn hall_accountable(model: &Model) -> ComponentSet {
    model
        .components()
        .iter()
        .filter(|c| !informed_unchecked(model, c).is_empty())
        .cloned()
        .collect()
}

pub fn lindberg_accountable(model: &Model, c: &EntityId) -> Result<PrincipalSet, QueryError> {
    require_component(model, c)?;
    Ok(lindberg_unchecked(model, c))
}

fn lindberg_unchecked(model: &Model, c: &EntityId) -> PrincipalSet {
    let responsible = responsible_unchecked(model, c);
    let constructor = model.component_configuration().get(c);
    informed_unchecked(model, c)
        .into_iter()
        .filter(|p| responsible.contains(p) || constructor == Some(p))
        .collect()
}

/// Union of `responsible` over the given causes of `e`.
pub fn raci_accountable(
    model: &Model,
    e: &EntityId,
    causes: &ComponentSet,
) -> Result<PrincipalSet, QueryError> {
    if !model.has_event(e) {
        return Err(QueryError::UnknownEvent(e.to_string()));
    }
    for c in causes {
        require_component(model, c)?;
    }
    Ok(causes.iter().flat_map(|c| responsible_unchecked(model, c)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SubjectKind {
    Component,
    Event,
}

/// One line of the comparison: which notions name a principal for the
/// subject, and whether they disagree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgreementRow {
    pub subject: EntityId,
    pub kind: SubjectKind,
    /// Notions that hold for the subject (hall membership, non-empty
    /// lindberg or raci set).
    pub notions: Vec<Notion>,
    pub principals: PrincipalSet,
    /// `false` for events without causal information.
    pub available: bool,
    /// Component rows: hall-accountable but no lindberg principal, or the
    /// reverse. Event rows: causes known but nobody raci-accountable.
    pub disagreement: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InterfaceUse {
    pub notion: Notion,
    pub requires: Vec<&'static str>,
    /// All required interfaces carry at least one fact in this model.
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RaciEntry {
    pub causes: ComponentSet,
    pub source: CauseSource,
    pub principals: PrincipalSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NotionReport {
    pub hall: ComponentSet,
    pub lindberg: BTreeMap<EntityId, PrincipalSet>,
    pub raci: BTreeMap<EntityId, RaciEntry>,
    pub raci_unavailable: EventSet,
    pub agreements: Vec<AgreementRow>,
    pub interfaces: Vec<InterfaceUse>,
    pub warnings: Vec<Violation>,
}

/// Evaluates all three notions over every component and event.
pub fn compare_notions(model: &Model) -> NotionReport {
    let hall = hall_accountable(model);
    let lindberg: BTreeMap<EntityId, PrincipalSet> =
        model.components().iter().map(|c| (c.clone(), lindberg_unchecked(model, c))).collect();

    let mut raci = BTreeMap::new();
    let mut raci_unavailable = EventSet::new();
    for e in model.events().keys() {
        let lookup = lookup_causes(model, e).expect("declared event");
        match lookup.effective() {
            Some((causes, source)) => {
                let principals = causes.iter().flat_map(|c| responsible_unchecked(model, c)).collect();
                raci.insert(e.clone(), RaciEntry { causes: causes.clone(), source, principals });
            }
            None => {
                raci_unavailable.insert(e.clone());
            }
        }
    }

    let mut agreements = Vec::new();
    for (c, principals) in &lindberg {
        let in_hall = hall.contains(c);
        let mut notions = Vec::new();
        if in_hall {
            notions.push(Notion::Hall);
        }
        if !principals.is_empty() {
            notions.push(Notion::Lindberg);
        }
        agreements.push(AgreementRow {
            subject: c.clone(),
            kind: SubjectKind::Component,
            disagreement: in_hall == principals.is_empty(),
            notions,
            principals: principals.clone(),
            available: true,
        });
    }
    for e in model.events().keys() {
        let row = match raci.get(e) {
            Some(entry) => AgreementRow {
                subject: e.clone(),
                kind: SubjectKind::Event,
                notions: if entry.principals.is_empty() { vec![] } else { vec![Notion::Raci] },
                principals: entry.principals.clone(),
                available: true,
                disagreement: entry.principals.is_empty(),
            },
            None => AgreementRow {
                subject: e.clone(),
                kind: SubjectKind::Event,
                notions: vec![],
                principals: PrincipalSet::new(),
                available: false,
                disagreement: false,
            },
        };
        agreements.push(row);
    }

    let has_obs = !model.observations().is_empty() && !model.has_account().is_empty();
    let has_corr = !model.correction_actions().is_empty();
    let has_conf = !model.component_configuration().is_empty();
    let has_caused = !raci.is_empty();
    let interfaces = [
        (Notion::Hall, has_obs),
        (Notion::Lindberg, has_obs && (has_corr || has_conf)),
        (Notion::Raci, has_obs && has_corr && has_caused),
    ]
    .into_iter()
    .map(|(notion, satisfied)| InterfaceUse {
        notion,
        requires: notion.required_interfaces().to_vec(),
        satisfied,
    })
    .collect();

    let warnings = raci
        .iter()
        .filter(|(_, entry)| entry.principals.len() > 1)
        .map(|(e, entry)| Violation {
            rule: RACI_UNIQ,
            severity: Severity::Warning,
            subjects: std::iter::once(e.clone()).chain(entry.principals.iter().cloned()).collect(),
            message: format!(
                "{} principals are raci-accountable for `{e}`; RACI expects exactly one",
                entry.principals.len()
            ),
        })
        .collect();

    NotionReport { hall, lindberg, raci, raci_unavailable, agreements, interfaces, warnings }
}
