use std::collections::BTreeSet;
use std::fmt::Write;

use crate::model::{
    BeingKind, EntityId, EventKind, Model, ObservationFact, PrincipalKind, StructItem,
};

fn list<'a>(ids: impl IntoIterator<Item = &'a EntityId>) -> String {
    let v: Vec<&str> = ids.into_iter().map(|i| i.as_str()).collect();
    format!("[{}]", v.join(", "))
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Canonical text form of a model. Re-parsing and resolving it yields an
/// equal model.
pub fn serialize(model: &Model) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "scenario {}", quote(model.name()));

    for c in model.components() {
        let _ = writeln!(w, "component {c}");
    }
    for (p, k) in model.principals() {
        let k = match k {
            PrincipalKind::Person => "person",
            PrincipalKind::LegalEntity => "legal_entity",
        };
        let _ = writeln!(w, "principal {p} kind={k}");
    }
    for (b, k) in model.beings() {
        let k = match k {
            BeingKind::Human => "human",
            BeingKind::Animal => "animal",
        };
        let _ = writeln!(w, "being {b} kind={k}");
    }
    for (e, k) in model.events() {
        let k = match k {
            EventKind::System => "system",
            EventKind::Environment => "environment",
        };
        let _ = writeln!(w, "event {e} kind={k}");
    }
    for a in model.accounts() {
        let _ = writeln!(w, "account {a}");
    }
    for a in model.actions() {
        let _ = writeln!(w, "action {a}");
    }

    for cps in model.cps().values() {
        let _ = writeln!(w, "cps {} {{", cps.id);
        let _ = writeln!(w, "  components = {}", list(&cps.components));
        let _ = writeln!(w, "  principals = {}", list(&cps.principals));
        for (c, p) in &cps.setups {
            let _ = writeln!(w, "  setup {c} by {p}");
        }
        for o in &cps.logs {
            let _ = writeln!(w, "  log {o}");
        }
        let _ = writeln!(w, "}}");
    }

    if let Some(sts) = model.sts() {
        let _ = writeln!(w, "ego {}", sts.ego);
        if sts.principals.iter().ne(model.principals().keys()) {
            let _ = writeln!(w, "sts principals = {}", list(&sts.principals));
        }
        if sts.beings.iter().ne(model.beings().keys()) {
            let _ = writeln!(w, "sts beings = {}", list(&sts.beings));
        }
        if sts.foreign != Model::default_foreign(model.cps(), &sts.ego) {
            let _ = writeln!(w, "sts foreign = {}", list(&sts.foreign));
        }
    }
    let mech = model.mechanism();
    if mech.accounts != *model.accounts() {
        let _ = writeln!(w, "mechanism accounts = {}", list(&mech.accounts));
    }
    if let Some(missed) = &mech.missed_by_ego {
        let _ = writeln!(w, "mechanism missed_by_ego = {}", list(missed));
    }

    // CPS blocks already contribute their setups and logs globally.
    let cps_setups: BTreeSet<(&EntityId, &EntityId)> =
        model.cps().values().flat_map(|c| c.setups.iter()).collect();
    for (c, p) in model.component_configuration() {
        if !cps_setups.contains(&(c, p)) {
            let _ = writeln!(w, "setup {c} by {p}");
        }
    }
    let cps_logs: BTreeSet<&ObservationFact> =
        model.cps().values().flat_map(|c| c.logs.iter()).collect();
    for o in model.observations() {
        if !cps_logs.contains(o) {
            let _ = writeln!(w, "observation {o}");
        }
    }
    for (a, p) in model.has_account() {
        let _ = writeln!(w, "has_account {a} by {p}");
    }
    for ((p, c), act) in model.correction_actions() {
        let _ = writeln!(w, "correction ({p}, {c}) -> {act}");
    }
    for (e, cs) in model.caused_facts() {
        let _ = writeln!(w, "caused {e} = {}", list(cs));
    }

    if let Some(sm) = model.structural() {
        let _ = writeln!(w, "structural {{");
        for item in sm.items() {
            let _ = match item {
                StructItem::Exo(v, b) => writeln!(w, "  exo {v} = {b}"),
                StructItem::Eq(v, e) => writeln!(w, "  eq {v} := {e}"),
                StructItem::MapComponent(v, c) => writeln!(w, "  map {v} -> component {c}"),
                StructItem::MapEvent(v, e) => writeln!(w, "  map {v} -> event {e}"),
            };
        }
        let _ = writeln!(w, "}}");
    }
    out
}
