//! Metric regularity of constraint systems `F(x, p) = y, g_i(x, p) <= z_i`.
//!
//! The pointwise test is the steepest-descent-rate criterion on the distance
//! function `psi = ||F - y|| + sum [g_i - z_i]_+`; the grid scans in [`scan`]
//! check the error-bound inequality directly on a dense sample.

pub mod scan;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::{Binding, Expr, ExprError};
use crate::qd::{qd_add, qd_plus_set, qd_scale, steepest_rate, Quasidifferential};
use crate::scalar::{norm2, Scalar};

pub use scan::{
    error_bound_estimate, margin_infima, ratio_profile, verify_regularity_grid, GridReport,
    GridSample, MarginInfimum, MarginScan, RatioPoint, ScanConfig,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegularityError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("norm-kink: F(x) = y, the Euclidean norm has no exact quasidifferential here; use l1 or the sampling oracle")]
    NormKink,
    #[error("system has neither equalities nor inequalities")]
    EmptySystem,
    #[error("expected {what} of length {expected}, got {found}")]
    Length {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Constraint system `f_j(x, p) = y_j`, `g_i(x, p) <= z_i` on `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec<T = f64> {
    pub n: usize,
    pub equalities: Vec<Expr<T>>,
    pub inequalities: Vec<Expr<T>>,
    pub params: BTreeMap<String, T>,
}

impl<T: Scalar> SystemSpec<T> {
    pub fn new(
        n: usize,
        equalities: Vec<Expr<T>>,
        inequalities: Vec<Expr<T>>,
    ) -> Result<Self, RegularityError> {
        if equalities.is_empty() && inequalities.is_empty() {
            return Err(RegularityError::EmptySystem);
        }
        for e in equalities.iter().chain(&inequalities) {
            if e.arity() > n {
                return Err(RegularityError::Length {
                    what: "point",
                    expected: e.arity(),
                    found: n,
                });
            }
        }
        Ok(SystemSpec {
            n,
            equalities,
            inequalities,
            params: BTreeMap::new(),
        })
    }

    /// Parses each component in the variables `x1..xn`.
    pub fn parse(n: usize, equalities: &[&str], inequalities: &[&str]) -> Result<Self, RegularityError> {
        let eq = equalities
            .iter()
            .map(|s| Expr::parse(s, n))
            .collect::<Result<Vec<_>, _>>()?;
        let ineq = inequalities
            .iter()
            .map(|s| Expr::parse(s, n))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(n, eq, ineq)
    }

    pub fn with_param(mut self, name: &str, value: T) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn l(&self) -> usize {
        self.equalities.len()
    }

    pub fn m(&self) -> usize {
        self.inequalities.len()
    }

    pub fn binding(&self, x: &[T]) -> Binding<T> {
        Binding {
            point: x.to_vec(),
            params: self.params.clone(),
        }
    }

    /// Same system with every parameter replaced by its value.
    pub(crate) fn substituted(&self) -> Self {
        SystemSpec {
            n: self.n,
            equalities: self.equalities.iter().map(|e| e.substitute(&self.params)).collect(),
            inequalities: self.inequalities.iter().map(|e| e.substitute(&self.params)).collect(),
            params: BTreeMap::new(),
        }
    }

    /// `(F(x), g(x))`.
    pub fn values(&self, x: &[T]) -> Result<(Vec<T>, Vec<T>), RegularityError> {
        let b = self.binding(x);
        let f = self
            .equalities
            .iter()
            .map(|e| e.eval(&b))
            .collect::<Result<Vec<_>, _>>()?;
        let g = self
            .inequalities
            .iter()
            .map(|e| e.eval(&b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((f, g))
    }

    /// l1 residual `||F(x) - y||_1 + sum [g_i(x) - z_i]_+`.
    pub fn residual(&self, x: &[T], y: &[T], z: &[T]) -> Result<T, RegularityError> {
        let (f, g) = self.values(x)?;
        Ok(l1_residual(&f, &g, y, z))
    }

    fn check_targets(&self, y: &[T], z: &[T]) -> Result<(), RegularityError> {
        if y.len() != self.l() {
            return Err(RegularityError::Length {
                what: "y",
                expected: self.l(),
                found: y.len(),
            });
        }
        if z.len() != self.m() {
            return Err(RegularityError::Length {
                what: "z",
                expected: self.m(),
                found: z.len(),
            });
        }
        Ok(())
    }
}

pub(crate) fn l1_residual<T: Scalar>(f: &[T], g: &[T], y: &[T], z: &[T]) -> T {
    let eq: T = f.iter().zip(y).map(|(a, b)| (*a - *b).abs()).sum();
    let ineq: T = g.iter().zip(z).map(|(a, b)| (*a - *b).max(T::zero())).sum();
    eq + ineq
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Norm {
    #[default]
    L1,
    L2,
}

/// Distance function `psi_(y,z)` of a system.
#[derive(Debug, Clone)]
pub struct Psi<T = f64> {
    norm: Norm,
    system: SystemSpec<T>,
    y: Vec<T>,
    z: Vec<T>,
    l1: Expr<T>,
    ineq_part: Option<Expr<T>>,
}

/// Builds `psi = ||F - y|| + sum max(g_i - z_i, 0)`.
pub fn psi_expr<T: Scalar>(
    s: &SystemSpec<T>,
    y: &[T],
    z: &[T],
    norm: Norm,
) -> Result<Psi<T>, RegularityError> {
    s.check_targets(y, z)?;
    let eq_terms: Vec<Expr<T>> = s
        .equalities
        .iter()
        .zip(y)
        .map(|(f, yj)| (Expr::constant(*yj) - f.clone()).abs())
        .collect();
    let ineq_terms: Vec<Expr<T>> = s
        .inequalities
        .iter()
        .zip(z)
        .map(|(g, zi)| Expr::max_of(vec![g.clone() - Expr::constant(*zi), Expr::constant(T::zero())]))
        .collect();
    let sum = |terms: Vec<Expr<T>>| terms.into_iter().reduce(|a, b| a + b);
    let ineq_part = sum(ineq_terms.clone());
    let l1 = sum(eq_terms.into_iter().chain(ineq_terms).collect()).expect("nonempty system");
    Ok(Psi {
        norm,
        system: s.clone(),
        y: y.to_vec(),
        z: z.to_vec(),
        l1,
        ineq_part,
    })
}

impl<T: Scalar> Psi<T> {
    /// The expression form, available for the l1 norm and for a single equality.
    pub fn expr(&self) -> Option<&Expr<T>> {
        (self.norm == Norm::L1 || self.system.l() <= 1).then_some(&self.l1)
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn eval(&self, x: &[T]) -> Result<T, RegularityError> {
        if let Some(e) = self.expr() {
            return Ok(e.eval(&self.system.binding(x))?);
        }
        let (f, g) = self.system.values(x)?;
        let d: Vec<T> = f.iter().zip(&self.y).map(|(a, b)| *a - *b).collect();
        Ok(norm2(&d) + l1_residual(&[], &g, &[], &self.z))
    }

    pub fn qd_at(&self, x: &[T]) -> Result<Quasidifferential<T>, RegularityError> {
        let b = self.system.binding(x);
        if let Some(e) = self.expr() {
            return Ok(e.qd_at(&b)?);
        }
        let (f, _) = self.system.values(x)?;
        let d: Vec<T> = f.iter().zip(&self.y).map(|(a, b)| *a - *b).collect();
        let nrm = norm2(&d);
        if nrm == T::zero() {
            return Err(RegularityError::NormKink);
        }
        let mut q = match &self.ineq_part {
            Some(e) => e.qd_at(&b)?,
            None => Quasidifferential::zero(self.system.n).map_err(ExprError::from)?,
        };
        for (fj, dj) in self.system.equalities.iter().zip(&d) {
            let qj = fj.qd_at(&b)?;
            q = qd_add(&q, &qd_scale(&qj, *dj / nrm)).map_err(ExprError::from)?;
        }
        Ok(q)
    }
}

/// Outcome of the steepest-descent-rate test at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition4<T = f64> {
    pub holds: bool,
    pub margin: T,
    pub witness_w: Vec<T>,
}

/// `exists w in sup` with `d(0, sub + w) > 1/K`; the margin is the vertex maximum.
pub fn check_condition4<T: Scalar>(q: &Quasidifferential<T>, k: T) -> Condition4<T> {
    let (margin, witness_w) = steepest_rate(q);
    Condition4 {
        holds: margin > T::one() / k,
        margin,
        witness_w,
    }
}

/// Comparator for the stronger condition asking `d(0, sub + w) > m` for every
/// `w in sup`. Returns `(holds for m, inf_w d(0, sub + w))`.
pub fn uderzo_condition<T: Scalar>(q: &Quasidifferential<T>, m: T) -> (bool, T) {
    let plus = qd_plus_set(q);
    let zero = vec![T::zero(); q.dim()];
    let (_, d) = plus.nearest_point_unchecked(&zero);
    (d > m, d)
}

/// Default radius schedule for [`sampled_strong_slope`].
pub fn default_radii<T: Scalar>() -> Vec<T> {
    [1e-3, 1e-4, 1e-5, 1e-6].iter().map(|r| T::lit(*r)).collect()
}

/// Sampling estimate of the strong slope
/// `limsup_{u -> x} max(f(x) - f(u), 0) / |x - u|`.
///
/// At each radius the best decrease quotient over a direction set is taken;
/// the result is the median of the last three radii.
pub fn sampled_strong_slope<T: Scalar>(
    f: &dyn Fn(&[T]) -> T,
    x: &[T],
    radii: &[T],
    seed: u64,
) -> T {
    let dirs = slope_directions::<T>(x.len(), seed);
    let fx = f(x);
    let mut per_scale: Vec<T> = radii
        .iter()
        .map(|&r| {
            dirs.iter()
                .map(|d| {
                    let u: Vec<T> = x.iter().zip(d).map(|(a, b)| *a + r * *b).collect();
                    (fx - f(&u)).max(T::zero()) / r
                })
                .fold(T::zero(), T::max)
        })
        .collect();
    let tail = per_scale.len().saturating_sub(3);
    let mut last: Vec<T> = per_scale.split_off(tail);
    if last.is_empty() {
        return T::zero();
    }
    last.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    last[last.len() / 2]
}

fn slope_directions<T: Scalar>(n: usize, seed: u64) -> Vec<Vec<T>> {
    match n {
        0 => vec![],
        1 => vec![vec![T::one()], vec![-T::one()]],
        2 => (0..3600)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / 3600.0;
                vec![T::lit(a.cos()), T::lit(a.sin())]
            })
            .collect(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out = Vec::new();
            for i in 0..n {
                for s in [1.0, -1.0] {
                    let mut e = vec![T::zero(); n];
                    e[i] = T::lit(s);
                    out.push(e);
                }
            }
            while out.len() < 4000 {
                let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                if nv > 1e-3 && nv <= 1.0 {
                    out.push(v.iter().map(|a| T::lit(a / nv)).collect());
                }
            }
            out
        }
    }
}

/// Pointwise regularity check at `(x, y, z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport<T = f64> {
    pub point: Vec<T>,
    pub y: Vec<T>,
    pub z: Vec<T>,
    pub psi: T,
    /// `(y, z)` is not in the image of `x`, i.e. `psi(x) > 0`.
    pub outside_graph: bool,
    pub condition4_margin: T,
    pub witness_w: Vec<T>,
    /// `1 / margin`, infinite when the margin is zero.
    pub k_estimate: T,
    pub holds: bool,
    pub sampled_slope: Option<T>,
    /// The sampled slope is positive, so the margin is the slope itself.
    pub slope_positive: Option<bool>,
}

pub fn regularity_at<T: Scalar>(
    s: &SystemSpec<T>,
    x: &[T],
    y: &[T],
    z: &[T],
    k: T,
    norm: Norm,
    sample_slope: Option<u64>,
) -> Result<RegularityReport<T>, RegularityError> {
    if x.len() != s.n {
        return Err(RegularityError::Length {
            what: "point",
            expected: s.n,
            found: x.len(),
        });
    }
    let psi = psi_expr(s, y, z, norm)?;
    let value = psi.eval(x)?;
    let q = psi.qd_at(x)?;
    let c4 = check_condition4(&q, k);
    let sampled = sample_slope.map(|seed| {
        let f = |u: &[T]| psi.eval(u).unwrap_or(T::nan());
        sampled_strong_slope(&f, x, &default_radii(), seed)
    });
    let slope_tol = T::lit(1e-6);
    Ok(RegularityReport {
        point: x.to_vec(),
        y: y.to_vec(),
        z: z.to_vec(),
        psi: value,
        outside_graph: value > T::zero(),
        k_estimate: if c4.margin > T::zero() {
            T::one() / c4.margin
        } else {
            T::infinity()
        },
        condition4_margin: c4.margin,
        witness_w: c4.witness_w,
        holds: c4.holds,
        sampled_slope: sampled,
        slope_positive: sampled.map(|v| v > slope_tol),
    })
}
