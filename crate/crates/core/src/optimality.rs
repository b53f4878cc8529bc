//! Necessary optimality conditions through the l1 exact penalty
//! `Psi_c = u + c (sum |f_j| + sum max(g_i, 0))`.
//!
//! Stationarity asks `0 in sub Psi_c + w` for every `w` in `sup Psi_c`.
//! The multiplier form fixes one vertex per superdifferential (and one per
//! equality subdifferential) and solves a small LP.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{Binding, Expr, ExprError};
use crate::geometry::{GeometryError, LinearProgram, LpOutcome, Polytope};
use crate::qd::{qd_abs, qd_add, qd_max, qd_scale, QdError, Quasidifferential};
use crate::scalar::Scalar;

pub const SELECTION_BUDGET: usize = 100_000;

/// Penalty weights used by reports when none are given.
pub fn default_c_ladder<T: Scalar>() -> Vec<T> {
    [0.5, 1.0, 2.0, 10.0, 100.0].iter().map(|c| T::lit(*c)).collect()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimalityError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Qd(#[from] QdError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("penalty weight must be nonnegative, got {0}")]
    NegativeWeight(f64),
    #[error("objective and constraints disagree on dimension: {expected} vs {found}")]
    Dimension { expected: usize, found: usize },
    #[error("selection does not fit the problem: {0}")]
    Selection(String),
}

/// `min u(x)` subject to `f_j(x) = 0`, `g_i(x) <= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgramSpec<T = f64> {
    pub n: usize,
    pub objective: Expr<T>,
    pub equalities: Vec<Expr<T>>,
    pub inequalities: Vec<Expr<T>>,
    pub params: BTreeMap<String, T>,
}

impl<T: Scalar> ProgramSpec<T> {
    pub fn new(
        n: usize,
        objective: Expr<T>,
        equalities: Vec<Expr<T>>,
        inequalities: Vec<Expr<T>>,
    ) -> Result<Self, OptimalityError> {
        for e in std::iter::once(&objective).chain(&equalities).chain(&inequalities) {
            if e.arity() > n {
                return Err(OptimalityError::Dimension {
                    expected: n,
                    found: e.arity(),
                });
            }
        }
        Ok(ProgramSpec {
            n,
            objective,
            equalities,
            inequalities,
            params: BTreeMap::new(),
        })
    }

    pub fn parse(
        n: usize,
        objective: &str,
        equalities: &[&str],
        inequalities: &[&str],
    ) -> Result<Self, OptimalityError> {
        let parse = |s: &&str| Expr::parse(s, n);
        Self::new(
            n,
            Expr::parse(objective, n)?,
            equalities.iter().map(parse).collect::<Result<_, _>>()?,
            inequalities.iter().map(parse).collect::<Result<_, _>>()?,
        )
    }

    pub fn with_param(mut self, name: &str, value: T) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn binding(&self, x: &[T]) -> Binding<T> {
        Binding {
            point: x.to_vec(),
            params: self.params.clone(),
        }
    }

    /// The constraint system `f = y`, `g <= z` seen by the regularity and
    /// constraint-qualification checks.
    pub fn system(&self) -> Option<crate::regularity::SystemSpec<T>> {
        let mut s = crate::regularity::SystemSpec::new(
            self.n,
            self.equalities.clone(),
            self.inequalities.clone(),
        )
        .ok()?;
        s.params = self.params.clone();
        Some(s)
    }
}

/// `Psi_c = u + c (sum |f_j| + sum max(g_i, 0))`; `c = 0` gives `u`.
pub fn build_penalty<T: Scalar>(p: &ProgramSpec<T>, c: T) -> Result<Expr<T>, OptimalityError> {
    if c < T::zero() || c.is_nan() {
        return Err(OptimalityError::NegativeWeight(c.as_f64()));
    }
    if c == T::zero() || (p.equalities.is_empty() && p.inequalities.is_empty()) {
        return Ok(p.objective.clone());
    }
    let mut terms = p
        .equalities
        .iter()
        .map(|f| f.clone().abs())
        .chain(
            p.inequalities
                .iter()
                .map(|g| Expr::max_of(vec![g.clone(), Expr::constant(T::zero())])),
        );
    let first = terms.next().expect("at least one constraint");
    let phi = terms.fold(first, |acc, t| acc + t);
    Ok(p.objective.clone() + Expr::constant(c) * phi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stationarity<T = f64> {
    pub holds: bool,
    /// A vertex `w` of `sup Psi_c` with `-w` outside `sub Psi_c`.
    pub violating_w: Option<Vec<T>>,
    /// Distance from `-w` to `sub Psi_c` for that vertex.
    pub gap: T,
}

/// `-v in sub` for every vertex `v` of `sup`.
pub fn stationarity_of<T: Scalar>(q: &Quasidifferential<T>, tol: T) -> Stationarity<T> {
    let mut worst: Option<(Vec<T>, T)> = None;
    for w in q.sup().vertices() {
        let neg: Vec<T> = w.iter().map(|a| -*a).collect();
        let d = q.sub().nearest_point_unchecked(&neg).1;
        if d > tol && worst.as_ref().map_or(true, |(_, g)| d > *g) {
            worst = Some((w.clone(), d));
        }
    }
    match worst {
        Some((w, gap)) => Stationarity {
            holds: false,
            violating_w: Some(w),
            gap,
        },
        None => Stationarity {
            holds: true,
            violating_w: None,
            gap: T::zero(),
        },
    }
}

pub fn check_stationarity<T: Scalar>(
    p: &ProgramSpec<T>,
    b: &Binding<T>,
    c: T,
) -> Result<Stationarity<T>, OptimalityError> {
    let q = build_penalty(p, c)?.qd_at(b)?;
    Ok(stationarity_of(&q, T::membership_tol()))
}

/// Quasidifferentials of the problem data at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgramQd<T = f64> {
    pub u: Quasidifferential<T>,
    pub f: Vec<Quasidifferential<T>>,
    pub g: Vec<Quasidifferential<T>>,
    pub f_values: Vec<T>,
    pub g_values: Vec<T>,
    pub active: Vec<usize>,
}

impl<T: Scalar> ProgramQd<T> {
    pub fn at(p: &ProgramSpec<T>, b: &Binding<T>) -> Result<Self, OptimalityError> {
        let tol = T::membership_tol();
        let mut out = ProgramQd {
            u: p.objective.qd_at(b)?,
            f: Vec::new(),
            g: Vec::new(),
            f_values: Vec::new(),
            g_values: Vec::new(),
            active: Vec::new(),
        };
        for f in &p.equalities {
            out.f.push(f.qd_at(b)?);
            out.f_values.push(f.eval(b)?);
        }
        for (i, g) in p.inequalities.iter().enumerate() {
            let v = g.eval(b)?;
            if v.abs() <= tol {
                out.active.push(i);
            }
            out.g.push(g.qd_at(b)?);
            out.g_values.push(v);
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.u.dim()
    }

    /// Penalty quasidifferential assembled from the parts by the calculus rules.
    pub fn penalty(&self, c: T) -> Result<Quasidifferential<T>, OptimalityError> {
        let n = self.dim();
        let mut phi = Quasidifferential::zero(n)?;
        for (q, v) in self.f.iter().zip(&self.f_values) {
            phi = qd_add(&phi, &qd_abs(q, *v)?)?;
        }
        for (q, v) in self.g.iter().zip(&self.g_values) {
            let m = qd_max(&[(*v, q.clone()), (T::zero(), Quasidifferential::zero(n)?)])?;
            phi = qd_add(&phi, &m)?;
        }
        Ok(qd_add(&self.u, &qd_scale(&phi, c))?)
    }

    /// Product of the vertex counts a selection ranges over.
    pub fn selection_count(&self) -> usize {
        let mut k = self.u.sup().num_vertices();
        for q in &self.f {
            k = k.saturating_mul(q.sub().num_vertices());
            k = k.saturating_mul(q.sup().num_vertices());
        }
        for &i in &self.active {
            k = k.saturating_mul(self.g[i].sup().num_vertices());
        }
        k
    }

    /// The `k`-th selection in mixed-radix order (objective digit fastest).
    pub fn selection(&self, mut k: usize) -> Selection {
        let mut take = |r: usize| {
            let d = k % r;
            k /= r;
            d
        };
        let w0 = take(self.u.sup().num_vertices());
        let mut v = Vec::new();
        let mut w = Vec::new();
        for q in &self.f {
            v.push(take(q.sub().num_vertices()));
            w.push(take(q.sup().num_vertices()));
        }
        let z = self
            .active
            .iter()
            .map(|&i| (i, take(self.g[i].sup().num_vertices())))
            .collect();
        Selection { w0, v, w, z }
    }
}

/// Vertex indices: `w0` into `sup u`, `v[j]` into `sub f_j`, `w[j]` into
/// `sup f_j`, and `(i, k)` pairs for active inequalities into `sup g_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Selection {
    pub w0: usize,
    pub v: Vec<usize>,
    pub w: Vec<usize>,
    pub z: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierCertificate<T = f64> {
    pub selection: Selection,
    pub mu_lower: Vec<T>,
    pub mu_upper: Vec<T>,
    /// One entry per inequality; zero for inactive ones.
    pub lambda: Vec<T>,
    pub residual: T,
    /// `max(mu_lower_j + mu_upper_j, lambda_i)`.
    pub bound: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MultiplierOutcome<T = f64> {
    Feasible(MultiplierCertificate<T>),
    Infeasible { selection: Selection },
}

impl<T> MultiplierOutcome<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, MultiplierOutcome::Feasible(_))
    }

    pub fn selection(&self) -> &Selection {
        match self {
            MultiplierOutcome::Feasible(c) => &c.selection,
            MultiplierOutcome::Infeasible { selection } => selection,
        }
    }
}

pub fn check_multipliers<T: Scalar>(
    p: &ProgramSpec<T>,
    b: &Binding<T>,
    selection: &Selection,
    c_bound: Option<T>,
) -> Result<MultiplierOutcome<T>, OptimalityError> {
    multipliers_of(&ProgramQd::at(p, b)?, selection, c_bound)
}

fn pick<T: Scalar>(poly: &Polytope<T>, k: usize, what: &str) -> Result<Vec<T>, OptimalityError> {
    poly.vertices().get(k).cloned().ok_or_else(|| {
        OptimalityError::Selection(format!(
            "{what} index {k} out of range ({} vertices)",
            poly.num_vertices()
        ))
    })
}

/// The conical-decomposition LP for one selection.
///
/// Each `mu * C` term becomes nonnegative weights on the vertices of `C`,
/// and `mu` is read back as the weight sum.
pub fn multipliers_of<T: Scalar>(
    pq: &ProgramQd<T>,
    sel: &Selection,
    c_bound: Option<T>,
) -> Result<MultiplierOutcome<T>, OptimalityError> {
    let n = pq.dim();
    let l = pq.f.len();
    if sel.v.len() != l || sel.w.len() != l {
        return Err(OptimalityError::Selection(format!(
            "expected {l} equality indices, got {} and {}",
            sel.v.len(),
            sel.w.len()
        )));
    }
    if sel.z.iter().map(|(i, _)| *i).ne(pq.active.iter().copied()) {
        return Err(OptimalityError::Selection(format!(
            "inequality indices must match the active set {:?}",
            pq.active
        )));
    }

    // Column groups: (sign, points). Group 0 is sub u + w0 with weights summing to 1.
    let w0 = pick(pq.u.sup(), sel.w0, "w0")?;
    let shift = |poly: &Polytope<T>, by: &[T]| -> Vec<Vec<T>> {
        poly.vertices()
            .iter()
            .map(|x| x.iter().zip(by).map(|(a, b)| *a + *b).collect())
            .collect()
    };
    let mut groups: Vec<(T, Vec<Vec<T>>)> = vec![(T::one(), shift(pq.u.sub(), &w0))];
    for j in 0..l {
        let vj = pick(pq.f[j].sub(), sel.v[j], "v")?;
        let wj = pick(pq.f[j].sup(), sel.w[j], "w")?;
        groups.push((-T::one(), shift(pq.f[j].sup(), &vj)));
        groups.push((T::one(), shift(pq.f[j].sub(), &wj)));
    }
    for &(i, k) in &sel.z {
        let zi = pick(pq.g[i].sup(), k, "z")?;
        groups.push((T::one(), shift(pq.g[i].sub(), &zi)));
    }
    let mut offsets = Vec::with_capacity(groups.len() + 1);
    let mut total = 0;
    for (_, pts) in &groups {
        offsets.push(total);
        total += pts.len();
    }
    offsets.push(total);

    let mut cost = vec![T::one(); total];
    cost[..offsets[1]].iter_mut().for_each(|c| *c = T::zero());
    let mut lp = LinearProgram::new(total).minimize(cost);
    for k in 0..total {
        lp.nonnegative(k);
    }
    let ones = |g: &[usize]| {
        let mut row = vec![T::zero(); total];
        for &gi in g {
            row[offsets[gi]..offsets[gi + 1]].iter_mut().for_each(|c| *c = T::one());
        }
        row
    };
    lp.eq(ones(&[0]), T::one());
    for d in 0..n {
        let mut row = Vec::with_capacity(total);
        for (sign, pts) in &groups {
            row.extend(pts.iter().map(|x| *sign * x[d]));
        }
        lp.eq(row, T::zero());
    }
    if let Some(c) = c_bound {
        for j in 0..l {
            lp.le(ones(&[1 + 2 * j, 2 + 2 * j]), c);
        }
        for k in 0..sel.z.len() {
            lp.le(ones(&[1 + 2 * l + k]), c);
        }
    }
    let LpOutcome::Optimal { point, .. } = lp.solve() else {
        return Ok(MultiplierOutcome::Infeasible {
            selection: sel.clone(),
        });
    };
    let mass = |g: usize| point[offsets[g]..offsets[g + 1]].iter().copied().sum::<T>();
    let mu_lower: Vec<T> = (0..l).map(|j| mass(1 + 2 * j)).collect();
    let mu_upper: Vec<T> = (0..l).map(|j| mass(2 + 2 * j)).collect();
    let mut lambda = vec![T::zero(); pq.g.len()];
    for (k, &(i, _)) in sel.z.iter().enumerate() {
        lambda[i] = mass(1 + 2 * l + k);
    }
    let mut r = vec![T::zero(); n];
    for (gi, (sign, pts)) in groups.iter().enumerate() {
        for (x, wt) in pts.iter().zip(&point[offsets[gi]..offsets[gi + 1]]) {
            for d in 0..n {
                r[d] += *sign * *wt * x[d];
            }
        }
    }
    let residual = r.iter().fold(T::zero(), |a, x| a.max(x.abs()));
    let bound = mu_lower
        .iter()
        .zip(&mu_upper)
        .map(|(a, b)| *a + *b)
        .chain(lambda.iter().copied())
        .fold(T::zero(), T::max);
    Ok(MultiplierOutcome::Feasible(MultiplierCertificate {
        selection: sel.clone(),
        mu_lower,
        mu_upper,
        lambda,
        residual,
        bound,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionVerdict {
    /// Every selection admits multipliers.
    Holds,
    /// Some selection is infeasible.
    Fails,
    /// Budget reached before a failure or the end of the enumeration.
    Partial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllSelections<T = f64> {
    pub verdict: SelectionVerdict,
    pub checked: usize,
    pub total: usize,
    /// Lowest-index infeasible selection.
    pub first_failure: Option<Selection>,
    /// Certificate for selection 0 when it is feasible.
    pub sample: Option<MultiplierCertificate<T>>,
}

pub fn check_all_selections<T: Scalar>(
    p: &ProgramSpec<T>,
    b: &Binding<T>,
    c_bound: Option<T>,
) -> Result<AllSelections<T>, OptimalityError> {
    all_selections_of(&ProgramQd::at(p, b)?, c_bound, SELECTION_BUDGET)
}

pub fn all_selections_of<T: Scalar>(
    pq: &ProgramQd<T>,
    c_bound: Option<T>,
    budget: usize,
) -> Result<AllSelections<T>, OptimalityError> {
    let total = pq.selection_count();
    let checked = total.min(budget);
    let outcomes = (0..checked)
        .into_par_iter()
        .map(|k| multipliers_of(pq, &pq.selection(k), c_bound))
        .collect::<Result<Vec<_>, _>>()?;
    let first_failure = outcomes
        .iter()
        .find(|o| !o.is_feasible())
        .map(|o| o.selection().clone());
    let sample = match outcomes.into_iter().next() {
        Some(MultiplierOutcome::Feasible(c)) => Some(c),
        _ => None,
    };
    let verdict = if first_failure.is_some() {
        SelectionVerdict::Fails
    } else if checked < total {
        SelectionVerdict::Partial
    } else {
        SelectionVerdict::Holds
    };
    Ok(AllSelections {
        verdict,
        checked,
        total,
        first_failure,
        sample,
    })
}

/// Empirical estimate of the least penalty weight that passes the
/// stationarity check. Not a bound derived from the problem data.
#[derive(Debug, Clone, PartialEq)]
pub struct CStarEstimate<T = f64> {
    pub estimate: T,
    /// Largest weight probed.
    pub probe: T,
}

/// Bisection on `[0, c_max]`, relying on monotonicity in `c` at feasible
/// points. `None` when the check fails at `c_max`.
pub fn estimate_c_star<T: Scalar>(
    p: &ProgramSpec<T>,
    b: &Binding<T>,
    c_max: T,
    tol: T,
) -> Result<Option<CStarEstimate<T>>, OptimalityError> {
    let pq = ProgramQd::at(p, b)?;
    let holds = |c: T| -> Result<bool, OptimalityError> {
        Ok(stationarity_of(&pq.penalty(c)?, T::membership_tol()).holds)
    };
    if !holds(c_max)? {
        return Ok(None);
    }
    if holds(T::zero())? {
        return Ok(Some(CStarEstimate {
            estimate: T::zero(),
            probe: c_max,
        }));
    }
    let (mut lo, mut hi) = (T::zero(), c_max);
    while hi - lo > tol {
        let mid = (lo + hi) / T::two();
        if holds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(CStarEstimate {
        estimate: hi,
        probe: c_max,
    }))
}

/// Verdicts at one penalty weight.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderRung<T = f64> {
    pub c: T,
    pub stationarity: Stationarity<T>,
    pub selections: AllSelections<T>,
}

/// Where the hypothesis behind the penalty argument comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Pathway<T = f64> {
    /// q.d.-MFCQ at the point.
    Mfcq { holds: bool },
    /// Empirical local error bound `d(x, feasible set) <= tau * residual`.
    ErrorBound { estimate: T },
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityReport<T = f64> {
    pub rungs: Vec<LadderRung<T>>,
    pub c_star: Option<CStarEstimate<T>>,
    pub pathway: Vec<Pathway<T>>,
    /// True when stationarity and the all-selections check agree on every rung.
    pub consistent: bool,
}

impl<T: Scalar> OptimalityReport<T> {
    pub fn holds_somewhere(&self) -> bool {
        self.rungs.iter().any(|r| r.stationarity.holds)
    }
}

/// Both checks over a ladder of weights, plus the `c*` estimate.
pub fn optimality_report<T: Scalar>(
    p: &ProgramSpec<T>,
    b: &Binding<T>,
    ladder: &[T],
) -> Result<OptimalityReport<T>, OptimalityError> {
    optimality_report_with(p, b, ladder, T::membership_tol())
}

pub fn optimality_report_with<T: Scalar>(
    p: &ProgramSpec<T>,
    b: &Binding<T>,
    ladder: &[T],
    tol: T,
) -> Result<OptimalityReport<T>, OptimalityError> {
    let pq = ProgramQd::at(p, b)?;
    let mut rungs = Vec::with_capacity(ladder.len());
    for &c in ladder {
        let q = build_penalty(p, c)?.qd_at(b)?;
        rungs.push(LadderRung {
            c,
            stationarity: stationarity_of(&q, tol),
            selections: all_selections_of(&pq, Some(c), SELECTION_BUDGET)?,
        });
    }
    let consistent = rungs.iter().all(|r| match r.selections.verdict {
        SelectionVerdict::Holds => r.stationarity.holds,
        SelectionVerdict::Fails => !r.stationarity.holds,
        SelectionVerdict::Partial => true,
    });
    let c_max = ladder.iter().copied().fold(T::zero(), T::max);
    let c_star = estimate_c_star(p, b, c_max, T::lit(1e-6))?;
    let pathway = match p.system() {
        Some(s) => match crate::cq::qd_mfcq(&s, b) {
            Ok(r) => vec![Pathway::Mfcq { holds: r.verdict }],
            Err(_) => vec![Pathway::None],
        },
        None => vec![Pathway::None],
    };
    Ok(OptimalityReport {
        rungs,
        c_star,
        pathway,
        consistent,
    })
}

/// Local-error-bound route: the empirical constant of
/// `d(x, feasible set) <= tau * (sum |f_j| + sum [g_i]_+)` near the point.
pub fn error_bound_pathway<T: Scalar>(
    p: &ProgramSpec<T>,
    x: &[T],
    cfg: &crate::regularity::scan::ScanConfig<T>,
) -> Result<Pathway<T>, crate::regularity::RegularityError> {
    match p.system() {
        Some(s) => Ok(Pathway::ErrorBound {
            estimate: crate::regularity::scan::error_bound_estimate(&s, x, cfg)?,
        }),
        None => Ok(Pathway::None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prog(u: &str, eq: &[&str], ineq: &[&str]) -> ProgramSpec<f64> {
        ProgramSpec::parse(2, u, eq, ineq).unwrap()
    }

    #[test]
    fn penalty_shape() {
        let p = prog("-x1 + x2", &["abs(x1) - abs(x2)"], &[]);
        assert_eq!(build_penalty(&p, 0.0).unwrap(), p.objective);
        let e = build_penalty(&p, 2.0).unwrap();
        assert_eq!(e.to_string(), "-(x1) + x2 + 2*abs(abs(x1) - abs(x2))");
        let b = p.binding(&[0.3, -0.3]);
        assert_eq!(e.eval(&b).unwrap(), p.objective.eval(&b).unwrap());
        assert!(build_penalty(&p, -1.0).is_err());
    }

    #[test]
    fn example_problem_fails_everywhere_on_ladder() {
        let p = prog("-x1 + x2", &["abs(x1) - abs(x2)"], &[]);
        let b = p.binding(&[0.0, 0.0]);
        for c in default_c_ladder::<f64>() {
            assert!(!check_stationarity(&p, &b, c).unwrap().holds, "c = {c}");
        }
        let sel = Selection {
            w0: 0,
            v: vec![index_of(&ProgramQd::at(&p, &b).unwrap().f[0].sub().vertices(), &[1.0, 0.0])],
            w: vec![index_of(&ProgramQd::at(&p, &b).unwrap().f[0].sup().vertices(), &[0.0, 1.0])],
            z: vec![],
        };
        assert!(!check_multipliers(&p, &b, &sel, None).unwrap().is_feasible());
    }

    fn index_of(vs: &[Vec<f64>], x: &[f64]) -> usize {
        vs.iter().position(|v| v == x).expect("vertex present")
    }

    #[test]
    fn smooth_and_kinked_minima() {
        let b = Binding::new(vec![0.0, 0.0]);
        let p = prog("x1*x1 + x2*x2", &[], &[]);
        assert!(check_stationarity(&p, &b, 3.0).unwrap().holds);
        let p = prog("abs(x1)", &[], &[]);
        assert!(check_stationarity(&p, &b, 1.0).unwrap().holds);
    }

    #[test]
    fn smooth_inequality_has_zero_multiplier() {
        let p = ProgramSpec::<f64>::parse(1, "x1*x1", &[], &["x1"]).unwrap();
        let b = p.binding(&[0.0]);
        let all = check_all_selections(&p, &b, None).unwrap();
        assert_eq!(all.verdict, SelectionVerdict::Holds);
        assert_eq!(all.sample.unwrap().lambda, vec![0.0]);
    }

    #[test]
    fn smooth_equality_matches_kkt() {
        // Classical multiplier of min x1^2 + x2 s.t. x2 = 0 at the origin is -1.
        let p = prog("x1*x1 + x2", &["x2"], &[]);
        let b = p.binding(&[0.0, 0.0]);
        let MultiplierOutcome::Feasible(cert) =
            check_multipliers(&p, &b, &ProgramQd::at(&p, &b).unwrap().selection(0), None).unwrap()
        else {
            panic!("expected multipliers");
        };
        assert!((cert.mu_upper[0] - cert.mu_lower[0] + 1.0).abs() < 1e-9);
        assert!(cert.residual < 1e-8);
        // min x2 s.t. x1 = 0 is not a KKT point: (0,1) + mu (1,0) never vanishes.
        let p = prog("x2", &["x1"], &[]);
        let sel = ProgramQd::at(&p, &b).unwrap().selection(0);
        assert!(!check_multipliers(&p, &b, &sel, None).unwrap().is_feasible());
    }

    #[test]
    fn inactive_multiplier_is_zero() {
        let p = prog("x1", &[], &["-x1", "x2 - 1"]);
        let b = p.binding(&[0.0, 0.0]);
        let all = check_all_selections(&p, &b, Some(10.0)).unwrap();
        assert_eq!(all.verdict, SelectionVerdict::Holds);
        let cert = all.sample.unwrap();
        assert_eq!(cert.lambda[1], 0.0);
        assert!((cert.lambda[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn c_star_for_exact_penalty() {
        // min x1 s.t. x1 = 0 needs c >= 1.
        let p = ProgramSpec::<f64>::parse(1, "x1", &["x1"], &[]).unwrap();
        let b = p.binding(&[0.0]);
        let est = estimate_c_star(&p, &b, 100.0, 1e-8).unwrap().unwrap();
        assert!((est.estimate - 1.0).abs() < 1e-6);
        let r = optimality_report(&p, &b, &default_c_ladder()).unwrap();
        assert!(r.consistent);
        assert!(!r.rungs[0].stationarity.holds && r.rungs[1].stationarity.holds);
        assert_eq!(r.pathway, vec![Pathway::Mfcq { holds: true }]);
        let cfg = crate::regularity::scan::ScanConfig::new(1.0, 0.1);
        let Pathway::ErrorBound { estimate } = error_bound_pathway(&p, &[0.0], &cfg).unwrap() else {
            panic!("expected an error-bound estimate");
        };
        assert!((estimate - 1.0).abs() < 1e-6, "{estimate}");
    }
}
