//! Quasidifferential calculus for expression-defined functions on `R^n`, with
//! checks built on top of it: metric regularity via the steepest-descent rate
//! of the distance function, the quasidifferential Mangasarian-Fromovitz
//! constraint qualification, and exact-penalty optimality conditions.
//!
//! All numeric types are generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar to `f64`.

pub mod cq;
pub mod expr;
pub mod geometry;
pub mod optimality;
pub mod qd;
pub mod regularity;
mod scalar;

pub use scalar::{Scalar, Tolerances};

pub use cq::MfcqReport;
pub use regularity::SystemSpec;
pub use expr::{Binding, Expr, ExprError};
pub use geometry::{GeometryError, LinearProgram, LpOutcome, LpStatus, Polytope};
pub use optimality::ProgramSpec;
pub use qd::{MatrixQuasidifferential, Quasidifferential};

pub type Polytope64 = Polytope<f64>;
pub type Polytope32 = Polytope<f32>;
pub type Quasidifferential64 = Quasidifferential<f64>;
pub type Quasidifferential32 = Quasidifferential<f32>;
pub type MatrixQuasidifferential64 = MatrixQuasidifferential<f64>;
pub type Expr64 = Expr<f64>;
pub type Expr32 = Expr<f32>;
pub type Binding64 = Binding<f64>;
pub type SystemSpec64 = SystemSpec<f64>;
pub type ProgramSpec64 = ProgramSpec<f64>;
