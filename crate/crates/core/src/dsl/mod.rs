//! The `.acct` scenario format.
//!
//! ```text
//! scenario "uber"
//! component LIDAR
//! principal UBER kind=legal_entity
//! cps EGO {
//!   components = [LIDAR]
//!   principals = [UBER]
//!   setup LIDAR by UBER
//!   log (DETECT, LIDAR) -> BLACKBOX
//! }
//! ego EGO
//! has_account BLACKBOX by UBER
//! ```
//!
//! One statement per line; `#` starts a comment. LF and CRLF line endings
//! are accepted, the serializer writes LF.

mod ast;
mod lexer;
mod parser;
mod resolve;
mod serialize;

use thiserror::Error;

pub use ast::{
    CpsItem, MechanismField, ParseError, ParseErrorKind, ScenarioAst, Span, Spanned, Statement,
    StsField,
};
pub use parser::{parse_scenario, parse_scenario_bytes};
pub use resolve::resolve;
pub use serialize::serialize;

use crate::model::{BuildError, Model};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("{}", join(.0))]
    Parse(Vec<ParseError>),
    #[error("{}", join(.0))]
    Build(Vec<BuildError>),
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("\n")
}

/// Parses and resolves scenario bytes in one step.
pub fn load_scenario(bytes: &[u8]) -> Result<Model, LoadError> {
    let ast = parse_scenario_bytes(bytes).map_err(LoadError::Parse)?;
    resolve(&ast).map_err(LoadError::Build)
}
