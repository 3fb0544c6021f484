use super::ast::{CpsItem, MechanismField, ScenarioAst, Statement, StsField};
use crate::model::{
    build_model_located, BuildError, CpsDecl, Declaration, Model, ModelError, ObservationFact,
};

/// Turns a parsed scenario into a validated model.
pub fn resolve(ast: &ScenarioAst) -> Result<Model, Vec<BuildError>> {
    let mut errors = Vec::new();
    let mut decls = Vec::with_capacity(ast.statements.len());
    for stmt in &ast.statements {
        let line = Some(stmt.span.line);
        let decl = match &stmt.node {
            Statement::Scenario(s) => Declaration::Scenario(s.clone()),
            Statement::Component(c) => Declaration::Component(c.clone()),
            Statement::Principal(p, k) => Declaration::Principal(p.clone(), *k),
            Statement::Being(b, k) => Declaration::Being(b.clone(), *k),
            Statement::Event(e, k) => Declaration::Event(e.clone(), *k),
            Statement::Account(a) => Declaration::Account(a.clone()),
            Statement::Action(a) => Declaration::Action(a.clone()),
            Statement::Ego(e) => Declaration::Ego(e.clone()),
            Statement::Sts(StsField::Principals, ids) => Declaration::StsPrincipals(ids.clone()),
            Statement::Sts(StsField::Beings, ids) => Declaration::StsBeings(ids.clone()),
            Statement::Sts(StsField::Foreign, ids) => Declaration::StsForeign(ids.clone()),
            Statement::Mechanism(MechanismField::Accounts, ids) => {
                Declaration::MechanismAccounts(ids.clone())
            }
            Statement::Mechanism(MechanismField::MissedByEgo, ids) => {
                Declaration::MissedByEgo(ids.clone())
            }
            Statement::Setup(c, p) => Declaration::Setup(c.clone(), p.clone()),
            Statement::Observation(e, c, a) => {
                Declaration::Observation(ObservationFact::new(e.clone(), c.clone(), a.clone()))
            }
            Statement::HasAccount(a, p) => Declaration::HasAccount(a.clone(), p.clone()),
            Statement::Correction(p, c, act) => {
                Declaration::Correction(p.clone(), c.clone(), act.clone())
            }
            Statement::Caused(e, cs) => Declaration::Caused(e.clone(), cs.clone()),
            Statement::Structural(items) => {
                Declaration::Structural(items.iter().map(|i| i.node.clone()).collect())
            }
            Statement::Cps { name, items } => {
                let mut cps = CpsDecl::new(name.clone());
                for item in items {
                    match &item.node {
                        CpsItem::Components(ids) => cps.components.extend(ids.iter().cloned()),
                        CpsItem::Principals(ids) => cps.principals.extend(ids.iter().cloned()),
                        CpsItem::Setup(c, p) => {
                            if cps.setups.insert(c.clone(), p.clone()).is_some_and(|old| old != *p) {
                                errors.push(BuildError {
                                    line: Some(item.span.line),
                                    error: ModelError::FunctionConflict {
                                        relation: "component configuration",
                                        key: c.to_string(),
                                    },
                                });
                            }
                        }
                        CpsItem::Log(e, c, a) => {
                            cps.logs.insert(ObservationFact::new(e.clone(), c.clone(), a.clone()));
                        }
                    }
                }
                Declaration::Cps(cps)
            }
        };
        decls.push((decl, line));
    }
    match build_model_located(decls) {
        Ok(model) if errors.is_empty() => Ok(model),
        Ok(_) => Err(errors),
        Err(more) => {
            errors.extend(more);
            Err(errors)
        }
    }
}
