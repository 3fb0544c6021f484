//! Full analysis report: violations, derived relations, blind spot,
//! notion comparison and causes, with a plain-text rendering.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use crate::causality::{lookup_causes, CauseLookup};
use crate::checks::{check_all, Mode, Violation};
use crate::model::{EntityId, EventSet, IdSet, Model, PrincipalSet};
use crate::notions::{compare_notions, NotionReport, SubjectKind};
use crate::relations::{constructed, informed, responsible};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationRow {
    pub informed: PrincipalSet,
    pub constructed: PrincipalSet,
    pub responsible: PrincipalSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub scenario: String,
    pub mode: Mode,
    pub violations: Vec<Violation>,
    pub relations: BTreeMap<EntityId, RelationRow>,
    pub missed_by_ego: Option<EventSet>,
    pub notions: NotionReport,
    pub causes: BTreeMap<EntityId, CauseLookup>,
    /// CAUSE-CONFLICT: events whose explicit and computed causes disagree.
    pub cause_conflicts: EventSet,
}

pub const CAUSE_CONFLICT: &str = "CAUSE-CONFLICT";

pub fn build_report(model: &Model, mode: Mode) -> Report {
    let relations = model
        .components()
        .iter()
        .map(|c| {
            let row = RelationRow {
                informed: informed(model, c).expect("declared component"),
                constructed: constructed(model, c).expect("declared component"),
                responsible: responsible(model, c).expect("declared component"),
            };
            (c.clone(), row)
        })
        .collect();
    let causes: BTreeMap<EntityId, CauseLookup> = model
        .events()
        .keys()
        .map(|e| (e.clone(), lookup_causes(model, e).expect("declared event")))
        .collect();
    let cause_conflicts = causes.iter().filter(|(_, l)| l.conflict).map(|(e, _)| e.clone()).collect();
    Report {
        scenario: model.name().to_string(),
        mode,
        violations: check_all(model, mode),
        relations,
        missed_by_ego: crate::relations::missed_by_ego(model).ok(),
        notions: compare_notions(model),
        causes,
        cause_conflicts,
    }
}

pub fn fmt_set(ids: &IdSet) -> String {
    let v: Vec<&str> = ids.iter().map(|i| i.as_str()).collect();
    format!("{{{}}}", v.join(", "))
}

/// Human-readable rendering carrying the same information as the JSON form.
pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    let w = &mut out;
    let mode = match report.mode {
        Mode::Strict => "strict",
        Mode::Lenient => "lenient",
    };
    let _ = writeln!(w, "scenario: {:?} (mode: {mode})", report.scenario);

    let _ = writeln!(w, "\nviolations ({}):", report.violations.len());
    for v in &report.violations {
        let subjects: Vec<&str> = v.subjects.iter().map(|s| s.as_str()).collect();
        let _ = writeln!(w, "  {} [{}] ({}) {}", v.rule, v.severity, subjects.join(", "), v.message);
    }

    let _ = writeln!(w, "\nrelations:");
    for (c, row) in &report.relations {
        let _ = writeln!(
            w,
            "  {c}: informed={} constructed={} responsible={}",
            fmt_set(&row.informed),
            fmt_set(&row.constructed),
            fmt_set(&row.responsible)
        );
    }

    match &report.missed_by_ego {
        Some(m) => {
            let _ = writeln!(w, "\nmissed_by_ego: {}", fmt_set(m));
        }
        None => {
            let _ = writeln!(w, "\nmissed_by_ego: unavailable (no ego system)");
        }
    }

    out.push_str(&render_notions(&report.notions));

    let w = &mut out;
    let _ = writeln!(w, "\ncauses:");
    for (e, l) in &report.causes {
        let _ = writeln!(w, "{}", render_cause_lookup_line(e, l));
    }
    for e in &report.cause_conflicts {
        let _ = writeln!(w, "  warning {CAUSE_CONFLICT}: explicit and computed causes of {e} differ");
    }
    out
}

/// Text form of a notion comparison.
pub fn render_notions(n: &NotionReport) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "\nnotions:");
    let _ = writeln!(w, "  hall: {}", fmt_set(&n.hall));
    for (c, ps) in &n.lindberg {
        let _ = writeln!(w, "  lindberg({c}): {}", fmt_set(ps));
    }
    for (e, entry) in &n.raci {
        let source = match entry.source {
            crate::causality::CauseSource::Explicit => "explicit",
            crate::causality::CauseSource::Computed => "computed",
        };
        let _ = writeln!(
            w,
            "  raci({e}): {} via {} causes {}",
            fmt_set(&entry.principals),
            source,
            fmt_set(&entry.causes)
        );
    }
    for e in &n.raci_unavailable {
        let _ = writeln!(w, "  raci({e}): unavailable");
    }
    let _ = writeln!(w, "  interfaces:");
    for i in &n.interfaces {
        let _ = writeln!(
            w,
            "    {}: requires {} ({})",
            format!("{:?}", i.notion).to_lowercase(),
            i.requires.join(", "),
            if i.satisfied { "present" } else { "missing" }
        );
    }
    let _ = writeln!(w, "  agreement:");
    for row in &n.agreements {
        let kind = match row.kind {
            SubjectKind::Component => "component",
            SubjectKind::Event => "event",
        };
        let notions: Vec<String> = row.notions.iter().map(|x| format!("{x:?}").to_lowercase()).collect();
        let status = if !row.available {
            "unavailable"
        } else if row.disagreement {
            "disagree"
        } else {
            "agree"
        };
        let _ = writeln!(
            w,
            "    {kind} {}: notions=[{}] principals={} {status}",
            row.subject,
            notions.join(", "),
            fmt_set(&row.principals)
        );
    }
    for v in &n.warnings {
        let _ = writeln!(w, "  warning {}: {}", v.rule, v.message);
    }
    out
}

fn render_cause_lookup_line(e: &EntityId, l: &CauseLookup) -> String {
    let explicit = l.explicit.as_ref().map_or("absent".to_string(), fmt_set);
    let computed = match (&l.computed, &l.computed_error) {
        (Some(r), _) => {
            let sets: Vec<String> = r.minimal_sets.iter().map(fmt_set).collect();
            format!("but_for={} minimal=[{}]", fmt_set(&r.but_for), sets.join(", "))
        }
        (None, Some(err)) => format!("unavailable ({err})"),
        (None, None) => "unavailable".into(),
    };
    format!("  {e}: explicit={explicit} computed: {computed}")
}
