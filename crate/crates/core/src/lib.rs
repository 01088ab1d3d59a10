//! A deductive database engine organised around one fixpoint operator.
//!
//! The general soft consequence operator evaluates softly stratified definite
//! rule sets (as produced by Magic Sets style rewritings) as well as
//! stratifiable disjunctive rule sets. Around it sit three rewriting passes:
//!
//! * [`magic`]: goal-directed query answering,
//! * [`propagate`]: incremental computation of induced updates,
//! * [`viewupdate`]: search for base updates realizing a view update.

pub mod error;
pub mod magic;
pub mod names;
pub mod operators;
pub mod parser;
pub mod propagate;
pub mod store;
pub mod stratify;
pub mod syntax;
pub mod viewupdate;

mod eval;

pub use error::{Error, Result};
pub use parser::{parse_program, parse_request, Program, Request, RequestKind};
pub use store::{min_models, prioritized_models, red, DisjunctiveFact, FactStore};
pub use stratify::{DependencyGraph, Partition};
pub use syntax::{Atom, Database, GroundAtom, Literal, Rule, Sign, Symbol, Term};
