//! Termination checking for dependently-typed higher-order rewrite systems
//! with size-annotated inductive types.
//!
//! The pipeline is: parse a signature and rule file ([`syntax`]), analyse the
//! signature ([`analysis`]), then check every rule against the computability
//! closure ([`termination`]). The remaining modules are the calculus itself:
//! terms and positions, the size algebra, reduction, subtyping and typing.

use std::sync::Arc;

pub type Name = Arc<str>;

pub mod accessibility;
pub mod analysis;
pub mod deduction;
pub mod metric;
pub mod poly;
pub mod position;
pub mod reduction;
pub mod signature;
pub mod size;
pub mod subtyping;
pub mod syntax;
pub mod term;
pub mod termination;
pub mod typing;

pub use position::{Position, Sign};
pub use reduction::{FuelExhausted, Rewriter, DEFAULT_FUEL};
pub use signature::Signature;
pub use size::{SizeExpr, SizeSubst};
pub use term::{Env, Sort, Term, TermSubst};
