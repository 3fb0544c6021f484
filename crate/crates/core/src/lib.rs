//! Formal accountability analysis for socio-technical systems.
//!
//! A scenario describes components, principals, events, accounts and the
//! base relations between them (observations, component configuration,
//! account ownership, correction actions and causes). From that the crate
//! derives who is informed about, constructed, or responsible for each
//! component, evaluates three notions of accountability (hall, lindberg and
//! raci), and checks the CPS / STS / accountability-mechanism schema
//! predicates.
//!
//! ```
//! use accountable::{dsl, notions, EntityId};
//!
//! let text = "\
//! component CAM
//! principal OPS kind=legal_entity
//! event SEEN kind=system
//! account LOG
//! observation (SEEN, CAM) -> LOG
//! has_account LOG by OPS
//! ";
//! let model = dsl::load_scenario(text.as_bytes()).unwrap();
//! let hall = notions::hall_accountable(&model);
//! assert!(hall.contains(&EntityId::new("CAM").unwrap()));
//! ```

pub mod causality;
pub mod checks;
pub mod dsl;
pub mod model;
pub mod notions;
pub mod relations;
pub mod report;

pub use checks::{check_all, Mode, Severity, Violation};
pub use model::{build_model, Declaration, EntityId, Model, ModelError};
