use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the analysis is generic over (`f32` or `f64`).
///
/// Each implementation carries its own default tolerances: the membership
/// tolerance used by feasibility and containment checks, the vertex
/// deduplication tolerance used by canonicalization, and the pivot
/// threshold used by the simplex solver.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Membership / feasibility tolerance.
    fn membership_tol() -> Self;
    /// Vertex deduplication tolerance.
    fn dedup_tol() -> Self;
    /// Pivot and reduced-cost threshold of the simplex solver.
    fn pivot_tol() -> Self;

    /// Converts an `f64` literal. Panics only for values the type cannot hold.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn membership_tol() -> Self {
        1e-9
    }
    fn dedup_tol() -> Self {
        1e-12
    }
    fn pivot_tol() -> Self {
        1e-11
    }
}

impl Scalar for f32 {
    fn membership_tol() -> Self {
        1e-4
    }
    fn dedup_tol() -> Self {
        1e-6
    }
    fn pivot_tol() -> Self {
        1e-6
    }
}

/// Tolerances shared by the checks. `Default` takes the scalar's defaults.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances<T> {
    /// Distance below which a point counts as a member of a set.
    pub membership: T,
    /// Coordinate gap below which two vertices are merged.
    pub dedup: T,
    /// Value gap under which max/min branches and inequalities count as active.
    pub active: T,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances {
            membership: T::membership_tol(),
            dedup: T::dedup_tol(),
            active: T::membership_tol(),
        }
    }
}

impl<T: Scalar> Tolerances<T> {
    /// Defaults with the membership and active-set tolerance replaced.
    pub fn with_membership(tol: T) -> Self {
        Tolerances {
            membership: tol,
            active: tol,
            ..Self::default()
        }
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

pub(crate) fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub(crate) fn sub_vec<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| *x - *y).collect()
}

pub(crate) fn max_abs<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}
