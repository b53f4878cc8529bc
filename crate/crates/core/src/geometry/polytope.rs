use std::cmp::Ordering;
use std::fmt;

use super::lp::LinearProgram;
use super::projection::min_norm_point;
use super::GeometryError;
use crate::scalar::{dot, norm2, sub_vec, Scalar, Tolerances};

/// Convex compact polytope in `R^dim`, held as its minimal vertex list.
///
/// Every constructor and operation returns the canonical form: vertices
/// deduplicated, non-extreme points removed, and the remainder sorted
/// lexicographically. Two polytopes describing the same set therefore have
/// equal vertex lists up to rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope<T = f64> {
    dim: usize,
    vertices: Vec<Vec<T>>,
}

impl<T: Scalar> Polytope<T> {
    /// Convex hull of `points` in canonical form.
    pub fn new(dim: usize, points: Vec<Vec<T>>) -> Result<Self, GeometryError> {
        Self::with_tolerances(dim, points, &Tolerances::default())
    }

    pub fn with_tolerances(
        dim: usize,
        points: Vec<Vec<T>>,
        tol: &Tolerances<T>,
    ) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::ZeroDimension);
        }
        if points.is_empty() {
            return Err(GeometryError::Empty);
        }
        for p in &points {
            if p.len() != dim {
                return Err(GeometryError::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(GeometryError::NonFinite);
            }
        }
        Ok(Polytope {
            dim,
            vertices: canonical_vertices(points, tol),
        })
    }

    /// Builds from points known to be well formed (same length, finite, nonempty).
    pub(crate) fn from_points_unchecked(dim: usize, points: Vec<Vec<T>>) -> Self {
        debug_assert!(!points.is_empty() && points.iter().all(|p| p.len() == dim));
        Polytope {
            dim,
            vertices: canonical_vertices(points, &Tolerances::default()),
        }
    }

    /// Single point `{p}`.
    pub fn point(p: Vec<T>) -> Result<Self, GeometryError> {
        let dim = p.len();
        Self::new(dim, vec![p])
    }

    /// `{0}` in `R^dim`.
    pub fn origin(dim: usize) -> Result<Self, GeometryError> {
        Self::new(dim, vec![vec![T::zero(); dim]])
    }

    pub fn segment(a: Vec<T>, b: Vec<T>) -> Result<Self, GeometryError> {
        let dim = a.len();
        Self::new(dim, vec![a, b])
    }

    /// Axis-aligned box `[lo_i, hi_i]` (vertex enumeration; keep `dim` small).
    pub fn cuboid(lo: &[T], hi: &[T]) -> Result<Self, GeometryError> {
        let dim = lo.len();
        if hi.len() != dim {
            return Err(GeometryError::DimensionMismatch {
                expected: dim,
                found: hi.len(),
            });
        }
        let pts = (0..1usize << dim)
            .map(|mask| {
                (0..dim)
                    .map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] })
                    .collect()
            })
            .collect();
        Self::new(dim, pts)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<T>] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_singleton(&self) -> bool {
        self.vertices.len() == 1
    }

    /// True when the set is `{0}`.
    pub fn is_origin(&self) -> bool {
        self.is_singleton() && self.vertices[0].iter().all(|x| *x == T::zero())
    }

    fn check_dim(&self, d: usize) -> Result<(), GeometryError> {
        if d == self.dim {
            Ok(())
        } else {
            Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                found: d,
            })
        }
    }

    /// `{x + y : x in self, y in other}`.
    pub fn minkowski_sum(&self, other: &Self) -> Result<Self, GeometryError> {
        self.check_dim(other.dim)?;
        let mut pts = Vec::with_capacity(self.vertices.len() * other.vertices.len());
        for a in &self.vertices {
            for b in &other.vertices {
                pts.push(a.iter().zip(b).map(|(x, y)| *x + *y).collect());
            }
        }
        Ok(Self::from_points_unchecked(self.dim, pts))
    }

    /// `t * self`.
    pub fn scale(&self, t: T) -> Self {
        let pts = self
            .vertices
            .iter()
            .map(|v| v.iter().map(|x| *x * t).collect())
            .collect();
        Self::from_points_unchecked(self.dim, pts)
    }

    /// `-self`.
    pub fn negate(&self) -> Self {
        self.scale(-T::one())
    }

    pub fn translate(&self, shift: &[T]) -> Result<Self, GeometryError> {
        self.check_dim(shift.len())?;
        let pts = self
            .vertices
            .iter()
            .map(|v| v.iter().zip(shift).map(|(x, s)| *x + *s).collect())
            .collect();
        Ok(Self::from_points_unchecked(self.dim, pts))
    }

    /// Convex hull of the union of `sets`.
    pub fn hull_of_union(sets: &[Self]) -> Result<Self, GeometryError> {
        let first = sets.first().ok_or(GeometryError::Empty)?;
        let mut pts = Vec::new();
        for s in sets {
            first.check_dim(s.dim)?;
            pts.extend(s.vertices.iter().cloned());
        }
        Ok(Self::from_points_unchecked(first.dim, pts))
    }

    /// Support function `max_{v in self} <v, h>`.
    pub fn support(&self, h: &[T]) -> Result<T, GeometryError> {
        self.check_dim(h.len())?;
        Ok(self.support_unchecked(h))
    }

    pub(crate) fn support_unchecked(&self, h: &[T]) -> T {
        self.vertices
            .iter()
            .map(|v| dot(v, h))
            .fold(T::neg_infinity(), T::max)
    }

    /// Vertex attaining the support function (first in canonical order on ties).
    pub fn support_vertex(&self, h: &[T]) -> &[T] {
        let mut best = 0;
        let mut best_val = T::neg_infinity();
        for (i, v) in self.vertices.iter().enumerate() {
            let val = dot(v, h);
            if val > best_val {
                best_val = val;
                best = i;
            }
        }
        &self.vertices[best]
    }

    /// Euclidean projection of `q` onto the polytope and its distance.
    pub fn nearest_point(&self, q: &[T]) -> Result<(Vec<T>, T), GeometryError> {
        self.check_dim(q.len())?;
        Ok(self.nearest_point_unchecked(q))
    }

    pub(crate) fn nearest_point_unchecked(&self, q: &[T]) -> (Vec<T>, T) {
        if self.vertices.len() == 1 {
            let d = norm2(&sub_vec(&self.vertices[0], q));
            return (self.vertices[0].clone(), d);
        }
        let shifted: Vec<Vec<T>> = self.vertices.iter().map(|v| sub_vec(v, q)).collect();
        let (x, _) = min_norm_point(&shifted);
        let d = norm2(&x);
        let p = x.iter().zip(q).map(|(a, b)| *a + *b).collect();
        (p, d)
    }

    pub fn distance_to(&self, q: &[T]) -> Result<T, GeometryError> {
        Ok(self.nearest_point(q)?.1)
    }

    /// `d(q, self) <= tol`.
    pub fn contains(&self, q: &[T], tol: T) -> Result<bool, GeometryError> {
        Ok(self.nearest_point(q)?.1 <= tol)
    }

    /// Vertex-wise comparison of canonical forms within `tol` (max-norm).
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.dim == other.dim
            && self.vertices.len() == other.vertices.len()
            && self
                .vertices
                .iter()
                .zip(&other.vertices)
                .all(|(a, b)| a.iter().zip(b).all(|(x, y)| (*x - *y).abs() <= tol))
    }

    /// Radius of the smallest origin-centred ball containing the set.
    pub fn max_norm(&self) -> T {
        self.vertices.iter().map(|v| norm2(v)).fold(T::zero(), T::max)
    }
}

impl<T: Scalar> fmt::Display for Polytope<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "co{{")?;
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "(")?;
            for (k, x) in v.iter().enumerate() {
                if k > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")?;
        }
        write!(f, "}}")
    }
}

/// Orthonormal basis of `span(points)`; its length is the rank.
pub fn span_basis<T: Scalar>(points: &[Vec<T>]) -> Vec<Vec<T>> {
    super::linalg::orthonormal_span(points, T::membership_tol())
}

pub(crate) fn lex_cmp<T: Scalar>(a: &[T], b: &[T]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    Ordering::Equal
}

fn canonical_vertices<T: Scalar>(mut points: Vec<Vec<T>>, tol: &Tolerances<T>) -> Vec<Vec<T>> {
    points.sort_by(|a, b| lex_cmp(a, b));
    // Deduplicate: sorted order keeps near-equal points adjacent in most cases;
    // the quadratic pass below catches the rest.
    let mut uniq: Vec<Vec<T>> = Vec::with_capacity(points.len());
    for p in points {
        let dup = uniq
            .iter()
            .any(|u| u.iter().zip(&p).all(|(a, b)| (*a - *b).abs() <= tol.dedup));
        if !dup {
            uniq.push(p);
        }
    }
    if uniq.len() <= 2 {
        return uniq;
    }
    let dim = uniq[0].len();
    if dim == 1 {
        let lo = uniq.first().cloned().expect("nonempty");
        let hi = uniq.last().cloned().expect("nonempty");
        return vec![lo, hi];
    }
    // Drop points lying in the hull of the remaining ones.
    let mut keep: Vec<bool> = vec![true; uniq.len()];
    for i in 0..uniq.len() {
        let others: Vec<&Vec<T>> = uniq
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i && keep[*j])
            .map(|(_, p)| p)
            .collect();
        if in_hull_lp(&uniq[i], &others, tol) {
            keep[i] = false;
        }
    }
    uniq.into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect()
}

/// LP test: is `v` a convex combination of `others` (within tolerance)?
fn in_hull_lp<T: Scalar>(v: &[T], others: &[&Vec<T>], tol: &Tolerances<T>) -> bool {
    let k = others.len();
    if k == 0 {
        return false;
    }
    let dim = v.len();
    // Bounding-box prefilter.
    for d in 0..dim {
        let lo = others.iter().map(|p| p[d]).fold(T::infinity(), T::min);
        let hi = others.iter().map(|p| p[d]).fold(T::neg_infinity(), T::max);
        if v[d] < lo - tol.membership || v[d] > hi + tol.membership {
            return false;
        }
    }
    let mut lp = LinearProgram::new(k);
    for j in 0..k {
        lp.nonnegative(j);
    }
    lp.eq(vec![T::one(); k], T::one());
    for d in 0..dim {
        lp.eq(others.iter().map(|p| p[d]).collect(), v[d]);
    }
    match lp.solve() {
        super::lp::LpOutcome::Optimal { point, .. } => {
            // Confirm the combination actually reproduces v.
            let mut comb = vec![T::zero(); dim];
            for (w, p) in point.iter().zip(others) {
                for (c, x) in comb.iter_mut().zip(p.iter()) {
                    *c += *w * *x;
                }
            }
            norm2(&sub_vec(&comb, v)) <= tol.membership
        }
        _ => false,
    }
}
