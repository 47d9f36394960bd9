//! Elliptic divisibility sequences on `y² = x(x² + b)`, the squarefree
//! descent of their terms, the attached Frey curves over real quadratic
//! fields, and an explicit bound on perfect-power exponents.

pub mod arith;
pub mod cli;
pub mod curve;
pub mod descent;
pub mod eds;
pub mod error;
pub mod frey;
pub mod ledger;
pub mod quadfield;

pub use error::{Error, Result};
