use std::fmt;

use serde::Serialize;

use crate::model::{BeingKind, EntityId, EventKind, PrincipalKind, StructItem};

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Span {
    pub line: u32,
    pub column: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spanned<T> {
    pub span: Span,
    pub node: T,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CpsItem {
    Components(Vec<EntityId>),
    Principals(Vec<EntityId>),
    Setup(EntityId, EntityId),
    Log(EntityId, EntityId, EntityId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StsField {
    Principals,
    Beings,
    Foreign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MechanismField {
    Accounts,
    MissedByEgo,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    Scenario(String),
    Component(EntityId),
    Principal(EntityId, PrincipalKind),
    Being(EntityId, BeingKind),
    Event(EntityId, EventKind),
    Account(EntityId),
    Action(EntityId),
    Cps { name: EntityId, items: Vec<Spanned<CpsItem>> },
    Ego(EntityId),
    Sts(StsField, Vec<EntityId>),
    Mechanism(MechanismField, Vec<EntityId>),
    Setup(EntityId, EntityId),
    Observation(EntityId, EntityId, EntityId),
    HasAccount(EntityId, EntityId),
    Correction(EntityId, EntityId, EntityId),
    Caused(EntityId, Vec<EntityId>),
    Structural(Vec<Spanned<StructItem>>),
}

/// Parsed scenario file, statements in source order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScenarioAst {
    pub scenario_name: Option<String>,
    pub statements: Vec<Spanned<Statement>>,
}

impl ScenarioAst {
    /// Number of statement nodes, counting block items individually.
    pub fn node_count(&self) -> usize {
        self.statements
            .iter()
            .map(|s| {
                1 + match &s.node {
                    Statement::Cps { items, .. } => items.len(),
                    Statement::Structural(items) => items.len(),
                    _ => 0,
                }
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseErrorKind {
    Syntax,
    UnterminatedBlock,
    InvalidUtf8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: u32,
    pub column: u32,
    pub expected: String,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ParseErrorKind::UnterminatedBlock => write!(
                f,
                "{}:{}: unterminated block, expected {} but found {}",
                self.line, self.column, self.expected, self.found
            ),
            ParseErrorKind::InvalidUtf8 => {
                write!(f, "{}:{}: input is not valid UTF-8", self.line, self.column)
            }
            ParseErrorKind::Syntax => write!(
                f,
                "{}:{}: expected {}, found {}",
                self.line, self.column, self.expected, self.found
            ),
        }
    }
}

impl std::error::Error for ParseError {}
