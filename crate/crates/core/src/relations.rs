//! Context-independent derived relations: `informed`, `constructed`,
//! `responsible`, and the ego system's blind spot `missedByEgo`.

use thiserror::Error;

use crate::model::{EntityId, EventSet, Model, PrincipalSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("the model has no ego system")]
    MissingSts,
}

pub(crate) fn require_component(model: &Model, c: &EntityId) -> Result<(), QueryError> {
    if model.has_component(c) {
        Ok(())
    } else {
        Err(QueryError::UnknownComponent(c.to_string()))
    }
}

/// Principals holding an account that records some event about `c`.
///
/// `hasAccount` is a relation, so `hasAccount(Observation(e, c)) = p` is read
/// as relational image: `p` is related to the observation's account.
pub fn informed(model: &Model, c: &EntityId) -> Result<PrincipalSet, QueryError> {
    require_component(model, c)?;
    Ok(informed_unchecked(model, c))
}

pub(crate) fn informed_unchecked(model: &Model, c: &EntityId) -> PrincipalSet {
    let accounts: std::collections::BTreeSet<&EntityId> = model
        .observations()
        .iter()
        .filter(|o| o.component == *c)
        .map(|o| &o.account)
        .collect();
    model
        .has_account()
        .iter()
        .filter(|(a, _)| accounts.contains(a))
        .map(|(_, p)| p.clone())
        .collect()
}

/// The principal that configured `c`, if any.
pub fn constructed(model: &Model, c: &EntityId) -> Result<PrincipalSet, QueryError> {
    require_component(model, c)?;
    Ok(model.component_configuration().get(c).cloned().into_iter().collect())
}

/// Informed principals that also have a correction action for `c`.
pub fn responsible(model: &Model, c: &EntityId) -> Result<PrincipalSet, QueryError> {
    require_component(model, c)?;
    Ok(responsible_unchecked(model, c))
}

pub(crate) fn responsible_unchecked(model: &Model, c: &EntityId) -> PrincipalSet {
    informed_unchecked(model, c)
        .into_iter()
        .filter(|p| model.correction_actions().contains_key(&(p.clone(), c.clone())))
        .collect()
}

/// Declared events that never appear in the ego system's own logs.
pub fn missed_by_ego(model: &Model) -> Result<EventSet, QueryError> {
    let ego = model.ego().ok_or(QueryError::MissingSts)?;
    let logged = ego.logged_events();
    Ok(model.events().keys().filter(|e| !logged.contains(*e)).cloned().collect())
}
