//! Polytope kernel: V-represented convex polytopes, their arithmetic, Euclidean
//! projection, and the dense LP solver the feasibility questions reduce to.

pub mod linalg;
pub mod lp;
mod polytope;
mod projection;

pub use lp::{LinearProgram, LpOutcome, LpStatus, Relation};
pub use polytope::{span_basis, Polytope};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("zero-dimensional ambient space")]
    ZeroDimension,
    #[error("empty point set")]
    Empty,
    #[error("non-finite coordinate")]
    NonFinite,
}
