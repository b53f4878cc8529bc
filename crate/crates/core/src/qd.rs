//! Quasidifferentials `[sub, sup]` and their calculus.
//!
//! A pair represents the directional derivative
//! `f'(x, h) = max_{v in sub} <v, h> + min_{w in sup} <w, h>`.
//! Pairs are only defined up to the shift `[sub + C, sup - C]`; everything
//! here produces one specific representation, bottom-up.

use std::fmt;

use thiserror::Error;

use crate::geometry::{GeometryError, Polytope};
use crate::scalar::{Scalar, Tolerances};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QdError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("max/min over an empty list")]
    EmptyList,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Quasidifferential<T = f64> {
    sub: Polytope<T>,
    sup: Polytope<T>,
}

impl<T: Scalar> Quasidifferential<T> {
    pub fn new(sub: Polytope<T>, sup: Polytope<T>) -> Result<Self, QdError> {
        if sub.dim() != sup.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: sub.dim(),
                found: sup.dim(),
            }
            .into());
        }
        Ok(Quasidifferential { sub, sup })
    }

    /// `[{g}, {0}]`, the representation of a differentiable function.
    pub fn smooth(gradient: Vec<T>) -> Result<Self, QdError> {
        let dim = gradient.len();
        Ok(Quasidifferential {
            sub: Polytope::point(gradient)?,
            sup: Polytope::origin(dim)?,
        })
    }

    /// `[{0}, {g}]`: same derivative as [`Self::smooth`], stored on the concave side.
    pub fn concave_leaf(gradient: Vec<T>) -> Result<Self, QdError> {
        let dim = gradient.len();
        Ok(Quasidifferential {
            sub: Polytope::origin(dim)?,
            sup: Polytope::point(gradient)?,
        })
    }

    pub fn zero(dim: usize) -> Result<Self, QdError> {
        Self::smooth(vec![T::zero(); dim])
    }

    pub fn sub(&self) -> &Polytope<T> {
        &self.sub
    }

    pub fn sup(&self) -> &Polytope<T> {
        &self.sup
    }

    pub fn dim(&self) -> usize {
        self.sub.dim()
    }

    pub fn into_parts(self) -> (Polytope<T>, Polytope<T>) {
        (self.sub, self.sup)
    }

    /// Directional derivative along `h`.
    pub fn dd(&self, h: &[T]) -> Result<T, GeometryError> {
        let hi = self.sub.support(h)?;
        let neg: Vec<T> = h.iter().map(|x| -*x).collect();
        Ok(hi - self.sup.support_unchecked(&neg))
    }

    /// `[sub + C, sup - C]`, an equivalent representation.
    pub fn shifted(&self, c: &Polytope<T>) -> Result<Self, QdError> {
        Ok(Quasidifferential {
            sub: self.sub.minkowski_sum(c)?,
            sup: self.sup.minkowski_sum(&c.negate())?,
        })
    }

    /// True when `sup` is `{0}`, i.e. the derivative is sublinear.
    pub fn is_convex_form(&self) -> bool {
        self.sup.is_origin()
    }
}

impl<T: Scalar> fmt::Display for Quasidifferential<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.sub, self.sup)
    }
}

pub fn dd<T: Scalar>(q: &Quasidifferential<T>, h: &[T]) -> Result<T, GeometryError> {
    q.dd(h)
}

pub fn qd_add<T: Scalar>(
    a: &Quasidifferential<T>,
    b: &Quasidifferential<T>,
) -> Result<Quasidifferential<T>, QdError> {
    Ok(Quasidifferential {
        sub: a.sub.minkowski_sum(&b.sub)?,
        sup: a.sup.minkowski_sum(&b.sup)?,
    })
}

/// Quasidifferential of `t * f`; negative `t` swaps the two sets.
pub fn qd_scale<T: Scalar>(a: &Quasidifferential<T>, t: T) -> Quasidifferential<T> {
    if t >= T::zero() {
        Quasidifferential {
            sub: a.sub.scale(t),
            sup: a.sup.scale(t),
        }
    } else {
        Quasidifferential {
            sub: a.sup.scale(t),
            sup: a.sub.scale(t),
        }
    }
}

/// Product rule: `D(f g) = f(x) Dg + g(x) Df`.
pub fn qd_mul<T: Scalar>(
    a: &Quasidifferential<T>,
    b: &Quasidifferential<T>,
    fa: T,
    fb: T,
) -> Result<Quasidifferential<T>, QdError> {
    qd_add(&qd_scale(b, fa), &qd_scale(a, fb))
}

/// Pointwise max rule over `(value, qd)` pairs, active tolerance 1e-9.
pub fn qd_max<T: Scalar>(items: &[(T, Quasidifferential<T>)]) -> Result<Quasidifferential<T>, QdError> {
    qd_max_with(items, Tolerances::default().active)
}

pub fn qd_max_with<T: Scalar>(
    items: &[(T, Quasidifferential<T>)],
    tol: T,
) -> Result<Quasidifferential<T>, QdError> {
    let top = items
        .iter()
        .map(|(v, _)| *v)
        .fold(None, |m: Option<T>, v| Some(m.map_or(v, |m| m.max(v))))
        .ok_or(QdError::EmptyList)?;
    let active: Vec<&Quasidifferential<T>> = items
        .iter()
        .filter(|(v, _)| *v >= top - tol)
        .map(|(_, q)| q)
        .collect();
    let dim = active[0].dim();
    for q in &active {
        if q.dim() != dim {
            return Err(GeometryError::DimensionMismatch {
                expected: dim,
                found: q.dim(),
            }
            .into());
        }
    }
    if active.len() == 1 {
        return Ok(active[0].clone());
    }
    let mut sup_total = active[0].sup.clone();
    for q in &active[1..] {
        sup_total = sup_total.minkowski_sum(&q.sup)?;
    }
    let mut pieces = Vec::with_capacity(active.len());
    for (k, qk) in active.iter().enumerate() {
        let mut piece = qk.sub.clone();
        for (i, qi) in active.iter().enumerate() {
            if i != k {
                piece = piece.minkowski_sum(&qi.sup.negate())?;
            }
        }
        pieces.push(piece);
    }
    Ok(Quasidifferential {
        sub: Polytope::hull_of_union(&pieces)?,
        sup: sup_total,
    })
}

/// Pointwise min rule, computed as `-max(-f_i)`.
pub fn qd_min<T: Scalar>(items: &[(T, Quasidifferential<T>)]) -> Result<Quasidifferential<T>, QdError> {
    qd_min_with(items, Tolerances::default().active)
}

pub fn qd_min_with<T: Scalar>(
    items: &[(T, Quasidifferential<T>)],
    tol: T,
) -> Result<Quasidifferential<T>, QdError> {
    let neg: Vec<(T, Quasidifferential<T>)> = items
        .iter()
        .map(|(v, q)| (-*v, qd_scale(q, -T::one())))
        .collect();
    Ok(qd_scale(&qd_max_with(&neg, tol)?, -T::one()))
}

/// `|f|` as `max{f, -f}` where `f(x) = f_value`.
pub fn qd_abs<T: Scalar>(q: &Quasidifferential<T>, f_value: T) -> Result<Quasidifferential<T>, QdError> {
    qd_max(&[(f_value, q.clone()), (-f_value, qd_scale(q, -T::one()))])
}

/// Quasidifferential sum `sub + sup`.
pub fn qd_plus_set<T: Scalar>(q: &Quasidifferential<T>) -> Polytope<T> {
    q.sub
        .minkowski_sum(&q.sup)
        .expect("sub and sup share a dimension")
}

/// `max_{w in sup} d(0, sub + w)` and a maximizing vertex `w`.
///
/// `w -> d(-w, sub)` is convex, so the maximum over `sup` sits at a vertex.
/// The value equals `max(0, -min_{|h| <= 1} f'(x, h))`.
pub fn steepest_rate<T: Scalar>(q: &Quasidifferential<T>) -> (T, Vec<T>) {
    let mut best = T::neg_infinity();
    let mut witness = q.sup.vertices()[0].clone();
    for w in q.sup.vertices() {
        let neg: Vec<T> = w.iter().map(|x| -*x).collect();
        let (_, d) = q.sub.nearest_point_unchecked(&neg);
        if d > best {
            best = d;
            witness = w.clone();
        }
    }
    (best, witness)
}

/// Row-wise quasidifferential of `F = (f_1, ..., f_l)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixQuasidifferential<T = f64> {
    rows: Vec<Quasidifferential<T>>,
}

impl<T: Scalar> MatrixQuasidifferential<T> {
    pub fn new(rows: Vec<Quasidifferential<T>>) -> Result<Self, QdError> {
        let first = rows.first().ok_or(QdError::EmptyList)?;
        let n = first.dim();
        for r in &rows {
            if r.dim() != n {
                return Err(GeometryError::DimensionMismatch {
                    expected: n,
                    found: r.dim(),
                }
                .into());
            }
        }
        Ok(MatrixQuasidifferential { rows })
    }

    pub fn rows(&self) -> &[Quasidifferential<T>] {
        &self.rows
    }

    /// Number of components `l`.
    pub fn l(&self) -> usize {
        self.rows.len()
    }

    /// Ambient dimension `n`.
    pub fn n(&self) -> usize {
        self.rows[0].dim()
    }

    /// Row `j` is `[D f_j]^+`.
    pub fn plus_rows(&self) -> Vec<Polytope<T>> {
        self.rows.iter().map(qd_plus_set).collect()
    }
}

pub fn matrix_qd_build<T: Scalar>(
    rows: Vec<Quasidifferential<T>>,
) -> Result<MatrixQuasidifferential<T>, QdError> {
    MatrixQuasidifferential::new(rows)
}

pub fn matrix_qd_plus<T: Scalar>(mq: &MatrixQuasidifferential<T>) -> Vec<Polytope<T>> {
    mq.plus_rows()
}
