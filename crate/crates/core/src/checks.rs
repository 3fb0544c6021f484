//! Schema predicates of the CPS, STS and AccountabilityMechanism state
//! spaces, each reported under a stable rule id.
//!
//! | rule    | predicate                                                  |
//! |---------|------------------------------------------------------------|
//! | CPS-1   | `system = ran(dom(logs))` (lenient: `ran(dom(logs)) ⊆ system`) |
//! | CPS-2   | `system ≠ ∅ ∧ principals ≠ ∅ ∧ setups ≠ ∅`                 |
//! | CPS-3   | `ran(setups) ⊆ principals`                                 |
//! | CPS-4   | `system = dom(setups)` (lenient: `system ⊆ dom(setups)`)   |
//! | STS-0   | foreign CPS ids are unique                                  |
//! | STS-1   | `ego_system ∉ ran(foreign_cps)`                             |
//! | STS-2   | `ego_system.principals ⊆ principals`                        |
//! | STS-3   | every foreign CPS's principals ⊆ `principals`               |
//! | STS-NONE| the model declares an STS at all                            |
//! | AM-1    | `ran(ego_system.logs) ⊆ accounts`                           |
//! | AM-2    | every foreign CPS's log accounts ⊆ `accounts`               |
//! | AM-3    | `dom(hasAccount) ⊆ accounts`                                |
//! | AM-4    | `dom(knownAccounts) ⊂ accounts` is strict (warning)         |
//! | AM-5    | a declared `missedByEgo` equals the computed one            |
//! | OBS-1   | `Observation` is functional on (event, component) (strict)  |

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::{CpsDecl, EntityId, IdSet, Model};
use crate::relations::missed_by_ego;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Strict,
    #[default]
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: &'static str,
    pub severity: Severity,
    pub subjects: Vec<EntityId>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}] {}", self.rule, self.severity, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("unknown cps `{0}`")]
    UnknownCps(String),
    #[error("the model declares no ego system")]
    MissingSts,
}

fn join(ids: &IdSet) -> String {
    let v: Vec<&str> = ids.iter().map(|i| i.as_str()).collect();
    format!("{{{}}}", v.join(", "))
}

fn violation(rule: &'static str, subjects: Vec<EntityId>, message: String) -> Violation {
    Violation { rule, severity: Severity::Error, subjects, message }
}

/// CPS-1..CPS-4 for one CPS.
pub fn check_cps(model: &Model, cps: &EntityId, mode: Mode) -> Result<Vec<Violation>, CheckError> {
    let decl = model.cps().get(cps).ok_or_else(|| CheckError::UnknownCps(cps.to_string()))?;
    Ok(check_cps_decl(decl, mode))
}

fn check_cps_decl(cps: &CpsDecl, mode: Mode) -> Vec<Violation> {
    let mut out = Vec::new();
    let id = &cps.id;
    let system = &cps.components;

    let logged = cps.logged_components();
    let cps1 = match mode {
        Mode::Strict => logged == *system,
        Mode::Lenient => logged.is_subset(system),
    };
    if !cps1 {
        out.push(violation(
            "CPS-1",
            vec![id.clone()],
            format!(
                "cps {id}: components in logs {} {} system {}",
                join(&logged),
                if mode == Mode::Strict { "differ from" } else { "are not within" },
                join(system)
            ),
        ));
    }

    let mut empty = Vec::new();
    if system.is_empty() {
        empty.push("components");
    }
    if cps.principals.is_empty() {
        empty.push("principals");
    }
    if cps.setups.is_empty() {
        empty.push("setups");
    }
    if !empty.is_empty() {
        out.push(violation("CPS-2", vec![id.clone()], format!("cps {id}: empty {}", empty.join(", "))));
    }

    let setup_principals: IdSet = cps.setups.values().cloned().collect();
    let stray: IdSet = setup_principals.difference(&cps.principals).cloned().collect();
    if !stray.is_empty() {
        let mut subjects = vec![id.clone()];
        subjects.extend(stray.iter().cloned());
        out.push(violation(
            "CPS-3",
            subjects,
            format!("cps {id}: setups by {} who are not principals of the cps", join(&stray)),
        ));
    }

    let configured: IdSet = cps.setups.keys().cloned().collect();
    let cps4 = match mode {
        Mode::Strict => configured == *system,
        Mode::Lenient => system.is_subset(&configured),
    };
    if !cps4 {
        out.push(violation(
            "CPS-4",
            vec![id.clone()],
            format!("cps {id}: configured components {} vs system {}", join(&configured), join(system)),
        ));
    }
    out
}

/// STS-0..STS-3.
pub fn check_sts(model: &Model) -> Result<Vec<Violation>, CheckError> {
    let sts = model.sts().ok_or(CheckError::MissingSts)?;
    let mut out = Vec::new();

    let mut seen = BTreeSet::new();
    let dups: IdSet = sts.foreign.iter().filter(|f| !seen.insert(*f)).cloned().collect();
    if !dups.is_empty() {
        out.push(violation(
            "STS-0",
            dups.iter().cloned().collect(),
            format!("foreign cps ids {} occur more than once", join(&dups)),
        ));
    }

    if sts.foreign.contains(&sts.ego) {
        out.push(violation(
            "STS-1",
            vec![sts.ego.clone()],
            format!("ego system {} is also listed as foreign", sts.ego),
        ));
    }

    if let Some(ego) = model.cps().get(&sts.ego) {
        let missing: IdSet = ego.principals.difference(&sts.principals).cloned().collect();
        if !missing.is_empty() {
            let mut subjects = vec![sts.ego.clone()];
            subjects.extend(missing.iter().cloned());
            out.push(violation(
                "STS-2",
                subjects,
                format!("ego principals {} are not STS principals", join(&missing)),
            ));
        }
    }

    let foreign: BTreeSet<&EntityId> = sts.foreign.iter().collect();
    for f in foreign {
        let Some(cps) = model.cps().get(f) else { continue };
        let missing: IdSet = cps.principals.difference(&sts.principals).cloned().collect();
        if !missing.is_empty() {
            let mut subjects = vec![f.clone()];
            subjects.extend(missing.iter().cloned());
            out.push(violation(
                "STS-3",
                subjects,
                format!("foreign cps {f} principals {} are not STS principals", join(&missing)),
            ));
        }
    }
    Ok(out)
}

/// AM-1..AM-5.
pub fn check_am(model: &Model) -> Vec<Violation> {
    let mut out = Vec::new();
    let accounts = &model.mechanism().accounts;

    if let Some(ego) = model.ego() {
        let missing: IdSet = ego.log_accounts().difference(accounts).cloned().collect();
        if !missing.is_empty() {
            out.push(violation(
                "AM-1",
                missing.iter().cloned().collect(),
                format!("ego log accounts {} are not mechanism accounts", join(&missing)),
            ));
        }
    }

    if let Some(sts) = model.sts() {
        let foreign: BTreeSet<&EntityId> = sts.foreign.iter().collect();
        for f in foreign {
            let Some(cps) = model.cps().get(f) else { continue };
            let missing: IdSet = cps.log_accounts().difference(accounts).cloned().collect();
            if !missing.is_empty() {
                let mut subjects = vec![f.clone()];
                subjects.extend(missing.iter().cloned());
                out.push(violation(
                    "AM-2",
                    subjects,
                    format!("foreign cps {f} log accounts {} are not mechanism accounts", join(&missing)),
                ));
            }
        }
    }

    let held: IdSet = model.has_account().iter().map(|(a, _)| a.clone()).collect();
    let unheld: IdSet = held.difference(accounts).cloned().collect();
    if !unheld.is_empty() {
        out.push(violation(
            "AM-3",
            unheld.iter().cloned().collect(),
            format!("held accounts {} are not mechanism accounts", join(&unheld)),
        ));
    }
    // Inclusion is AM-3's business; AM-4 only flags the missing strictness.
    if held == *accounts {
        out.push(Violation {
            rule: "AM-4",
            severity: Severity::Warning,
            subjects: Vec::new(),
            message: format!("every mechanism account {} is held by a principal", join(accounts)),
        });
    }

    if let (Some(declared), Ok(computed)) = (&model.mechanism().missed_by_ego, missed_by_ego(model)) {
        if *declared != computed {
            let diff: IdSet = declared.symmetric_difference(&computed).cloned().collect();
            out.push(violation(
                "AM-5",
                diff.iter().cloned().collect(),
                format!("declared missed_by_ego {} but computed {}", join(declared), join(&computed)),
            ));
        }
    }
    out
}

/// OBS-1: in strict mode each (event, component) has at most one account.
fn check_observations(model: &Model) -> Vec<Violation> {
    let mut by_key: BTreeMap<(&EntityId, &EntityId), IdSet> = BTreeMap::new();
    for o in model.observations() {
        by_key.entry((&o.event, &o.component)).or_default().insert(o.account.clone());
    }
    by_key
        .into_iter()
        .filter(|(_, accounts)| accounts.len() > 1)
        .map(|((e, c), accounts)| {
            violation(
                "OBS-1",
                vec![e.clone(), c.clone()],
                format!("observation ({e}, {c}) is recorded in several accounts {}", join(&accounts)),
            )
        })
        .collect()
}

/// Every check, sorted by rule id then subjects.
pub fn check_all(model: &Model, mode: Mode) -> Vec<Violation> {
    let mut out = Vec::new();
    for cps in model.cps().values() {
        out.extend(check_cps_decl(cps, mode));
    }
    match check_sts(model) {
        Ok(v) => out.extend(v),
        Err(_) => out.push(violation(
            "STS-NONE",
            Vec::new(),
            "no ego system is declared, so the STS schema cannot hold".into(),
        )),
    }
    out.extend(check_am(model));
    if mode == Mode::Strict {
        out.extend(check_observations(model));
    }
    out.sort_by(|a, b| (a.rule, &a.subjects).cmp(&(b.rule, &b.subjects)));
    out
}

pub fn has_errors(violations: &[Violation]) -> bool {
    violations.iter().any(|v| v.severity == Severity::Error)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, Declaration, EventKind, ObservationFact, PrincipalKind};

    fn id(s: &str) -> EntityId {
        EntityId::new(s).unwrap()
    }

    fn minimal(cps: CpsDecl) -> Model {
        build_model(vec![
            Declaration::Component(id("C1")),
            Declaration::Principal(id("P1"), PrincipalKind::Person),
            Declaration::Event(id("E1"), EventKind::System),
            Declaration::Account(id("A1")),
            Declaration::Cps(cps),
            Declaration::Ego(id("EGO")),
        ])
        .unwrap()
    }

    fn good_cps() -> CpsDecl {
        let mut cps = CpsDecl::new(id("EGO"));
        cps.components.insert(id("C1"));
        cps.principals.insert(id("P1"));
        cps.setups.insert(id("C1"), id("P1"));
        cps.logs.insert(ObservationFact::new(id("E1"), id("C1"), id("A1")));
        cps
    }

    #[test]
    fn satisfying_cps_has_no_violations() {
        let m = minimal(good_cps());
        assert!(check_cps(&m, &id("EGO"), Mode::Strict).unwrap().is_empty());
        assert!(check_all(&m, Mode::Strict).is_empty());
    }

    #[test]
    fn empty_setups_break_cps2_and_cps4() {
        let mut cps = good_cps();
        cps.setups.clear();
        let m = minimal(cps);
        let rules: Vec<_> =
            check_cps(&m, &id("EGO"), Mode::Strict).unwrap().iter().map(|v| v.rule).collect();
        assert_eq!(rules, vec!["CPS-2", "CPS-4"]);
    }

    #[test]
    fn unknown_cps_is_an_error() {
        let m = minimal(good_cps());
        assert_eq!(check_cps(&m, &id("NOPE"), Mode::Strict), Err(CheckError::UnknownCps("NOPE".into())));
    }

    #[test]
    fn missing_sts_is_reported() {
        let m = build_model(vec![]).unwrap();
        assert_eq!(check_sts(&m), Err(CheckError::MissingSts));
        let rules: Vec<_> = check_all(&m, Mode::Lenient).iter().map(|v| v.rule).collect();
        assert_eq!(rules, vec!["AM-4", "STS-NONE"]);
    }
}
