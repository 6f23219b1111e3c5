//! Periodic orbits of polynomial maps: enumeration, hyperbolicity
//! classification, period counts and zeta truncations, Monte-Carlo
//! genericity experiments, degenerate-point splitting, and exact
//! resultant elimination of the nonhyperbolicity system.

// Negated float comparisons are deliberate: NaN must fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod census;
pub mod classify;
pub mod degenerate;
pub mod eliminate;
pub mod error;
pub mod genericity;
pub mod polymap;
pub mod roots;
pub mod series;
pub mod solver;

pub use error::{Error, Result};
pub use polymap::{Field, Jacobian, MultiIndex, PolyMap, C64};
