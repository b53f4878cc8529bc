//! Mangasarian-Fromovitz-type constraint qualification stated through
//! quasidifferential sums `[D f]^+ = sub + sup`.
//!
//! The check has two parts: linear independence of the equality sums
//! (no `lambda != 0` with `0 in sum lambda_j A_j`) and a direction `h` that is
//! orthogonal to every equality sum and strictly negative on every active
//! inequality sum.

use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{qd_matrix_at, Binding, ExprError};
use crate::geometry::linalg::{determinant, orthogonal_complement};
use crate::geometry::{span_basis, GeometryError, LinearProgram, LpOutcome, Polytope};
use crate::qd::{qd_plus_set, QdError};
use crate::regularity::SystemSpec;
use crate::scalar::{dot, Scalar};

pub const DET_TUPLE_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CqError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Qd(#[from] QdError),
    #[error("budget: {count} vertex tuples exceed the cap of {cap}")]
    Budget { count: usize, cap: usize },
    #[error("base point is infeasible: equality residuals {equalities:?}, inequality values {inequalities:?}")]
    Infeasible {
        equalities: Vec<f64>,
        inequalities: Vec<f64>,
    },
    #[error("determinant range needs a square system, got {rows} rows in dimension {dim}")]
    NotSquare { rows: usize, dim: usize },
}

/// Indices `i` with `|g_i(x, p)| <= tol`.
pub fn active_inequalities<T: Scalar>(
    s: &SystemSpec<T>,
    b: &Binding<T>,
    tol: T,
) -> Result<Vec<usize>, CqError> {
    let mut out = Vec::new();
    for (i, g) in s.inequalities.iter().enumerate() {
        if g.eval(b)?.abs() <= tol {
            out.push(i);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetRange<T = f64> {
    pub min: T,
    pub max: T,
    pub full_rank: bool,
    pub tuples: usize,
}

/// Range of `det` over matrices whose row `j` lies in `rows[j]`.
///
/// The determinant is affine in each row, so both extremes sit at vertex
/// tuples, and the image of the (connected) product is the whole interval.
pub fn full_rank_det_range<T: Scalar>(rows: &[Polytope<T>]) -> Result<DetRange<T>, CqError> {
    full_rank_det_range_with(rows, DET_TUPLE_BUDGET, T::membership_tol())
}

pub fn full_rank_det_range_with<T: Scalar>(
    rows: &[Polytope<T>],
    budget: usize,
    tol: T,
) -> Result<DetRange<T>, CqError> {
    let l = rows.len();
    if l == 0 || rows.iter().any(|r| r.dim() != l) {
        return Err(CqError::NotSquare {
            rows: l,
            dim: rows.first().map_or(0, Polytope::dim),
        });
    }
    let counts: Vec<usize> = rows.iter().map(Polytope::num_vertices).collect();
    let total = counts
        .iter()
        .try_fold(1usize, |acc, c| acc.checked_mul(*c))
        .filter(|t| *t <= budget)
        .ok_or(CqError::Budget {
            count: counts.iter().fold(1usize, |a, c| a.saturating_mul(*c)),
            cap: budget,
        })?;
    let (min, max) = (0..total)
        .into_par_iter()
        .map(|mut k| {
            let m: Vec<Vec<T>> = rows
                .iter()
                .zip(&counts)
                .map(|(r, c)| {
                    let v = r.vertices()[k % c].clone();
                    k /= c;
                    v
                })
                .collect();
            let d = determinant(&m);
            (d, d)
        })
        .reduce(
            || (T::infinity(), T::neg_infinity()),
            |a, b| (a.0.min(b.0), a.1.max(b.1)),
        );
    Ok(DetRange {
        min,
        max,
        full_rank: min > tol || max < -tol,
        tuples: total,
    })
}

/// How a full-rank verdict was reached.
#[derive(Debug, Clone, PartialEq)]
pub enum RankCertificate<T = f64> {
    /// Single row: `0 not in A_1`, decided by projection.
    Exact { distance: T },
    DetRange(DetRange<T>),
    /// More rows than dimensions: never full rank.
    TooManyRows,
    /// One feasibility LP per sign pattern of `lambda`; exact.
    Orthants { lps: usize },
    /// Sphere grid over `lambda`: smallest `d(0, sum lambda_j A_j)` found.
    /// `lipschitz_certified` means the grid minimum exceeds the Lipschitz
    /// constant times the grid covering radius, which rules out hits
    /// between grid points.
    Grid {
        directions: usize,
        min_distance: T,
        lipschitz_certified: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullRank<T = f64> {
    pub full_rank: bool,
    pub certificate: RankCertificate<T>,
    /// A `lambda` (unit norm) with `0 in sum lambda_j A_j`, when found.
    pub witness_lambda: Option<Vec<T>>,
}

/// Linear independence of the row sets `A_1, ..., A_l` in `R^n`.
pub fn full_rank_general<T: Scalar>(
    rows: &[Polytope<T>],
    grid_density: usize,
    seed: u64,
) -> Result<FullRank<T>, CqError> {
    let tol = T::membership_tol();
    let l = rows.len();
    let Some(first) = rows.first() else {
        return Ok(FullRank {
            full_rank: true,
            certificate: RankCertificate::TooManyRows,
            witness_lambda: None,
        });
    };
    let n = first.dim();
    if l == 1 {
        let d = first.distance_to(&vec![T::zero(); n])?;
        return Ok(FullRank {
            full_rank: d > tol,
            certificate: RankCertificate::Exact { distance: d },
            witness_lambda: (d <= tol).then(|| vec![T::one()]),
        });
    }
    if l > n {
        return Ok(FullRank {
            full_rank: false,
            certificate: RankCertificate::TooManyRows,
            witness_lambda: None,
        });
    }
    if l == n {
        let r = full_rank_det_range(rows)?;
        return Ok(FullRank {
            full_rank: r.full_rank,
            certificate: RankCertificate::DetRange(r),
            witness_lambda: None,
        });
    }
    if l <= ORTHANT_MAX_ROWS {
        return full_rank_orthants(rows);
    }
    full_rank_grid(rows, grid_density, seed)
}

/// Row counts up to this use [`full_rank_orthants`] in [`full_rank_general`].
pub const ORTHANT_MAX_ROWS: usize = 12;

/// Exact test: `0 in sum lambda_j A_j` with `lambda` in a fixed sign
/// orthant is linear in vertex weights `beta_jk >= 0` with `sum beta = 1`,
/// taking `lambda_j = sign_j * sum_k beta_jk`.
pub fn full_rank_orthants<T: Scalar>(rows: &[Polytope<T>]) -> Result<FullRank<T>, CqError> {
    let l = rows.len();
    let n = rows.first().map_or(0, Polytope::dim);
    let total: usize = rows.iter().map(Polytope::num_vertices).sum();
    let lps = 1usize << l.saturating_sub(1);
    let hit = (0..lps).into_par_iter().find_map_first(|mask| {
        let signs: Vec<T> = (0..l)
            .map(|j| if j > 0 && mask >> (j - 1) & 1 == 1 { -T::one() } else { T::one() })
            .collect();
        let mut lp = LinearProgram::new(total).minimize(vec![T::zero(); total]);
        for k in 0..total {
            lp.nonnegative(k);
        }
        lp.eq(vec![T::one(); total], T::one());
        for d in 0..n {
            let row: Vec<T> = rows
                .iter()
                .zip(&signs)
                .flat_map(|(r, sg)| r.vertices().iter().map(move |v| *sg * v[d]))
                .collect();
            lp.eq(row, T::zero());
        }
        let point = lp.solve().point()?.to_vec();
        let mut lam = Vec::with_capacity(l);
        let mut at = 0;
        for (r, sg) in rows.iter().zip(&signs) {
            let m: T = point[at..at + r.num_vertices()].iter().copied().sum();
            lam.push(*sg * m);
            at += r.num_vertices();
        }
        let nl = lam.iter().map(|a| *a * *a).sum::<T>().sqrt();
        Some(lam.into_iter().map(|a| a / nl).collect::<Vec<T>>())
    });
    Ok(FullRank {
        full_rank: hit.is_none(),
        certificate: RankCertificate::Orthants { lps },
        witness_lambda: hit,
    })
}

/// Grid test over unit `lambda`; see [`RankCertificate::Grid`].
pub fn full_rank_grid<T: Scalar>(
    rows: &[Polytope<T>],
    grid_density: usize,
    seed: u64,
) -> Result<FullRank<T>, CqError> {
    let tol = T::membership_tol();
    let l = rows.len();
    let n = rows.first().map_or(0, Polytope::dim);
    let lambdas = sphere_grid::<T>(l, grid_density, seed);
    let zero = vec![T::zero(); n];
    let dists: Vec<T> = lambdas
        .par_iter()
        .map(|lam| {
            let mut acc = rows[0].scale(lam[0]);
            for (r, c) in rows.iter().zip(lam).skip(1) {
                acc = acc.minkowski_sum(&r.scale(*c)).expect("rows share a dimension");
            }
            acc.nearest_point_unchecked(&zero).1
        })
        .collect();
    let (arg, min_distance) = dists
        .iter()
        .enumerate()
        .fold((0, T::infinity()), |(bi, bd), (i, d)| if *d < bd { (i, *d) } else { (bi, bd) });
    let lipschitz = rows
        .iter()
        .map(|r| r.max_norm() * r.max_norm())
        .sum::<T>()
        .sqrt();
    let covering = match l {
        2 => Some(T::two() * (T::lit(std::f64::consts::PI) / T::lit(2.0 * lambdas.len() as f64)).sin()),
        _ => None,
    };
    let hit = min_distance <= tol;
    Ok(FullRank {
        full_rank: !hit,
        certificate: RankCertificate::Grid {
            directions: lambdas.len(),
            min_distance,
            lipschitz_certified: covering.is_some_and(|c| min_distance > lipschitz * c),
        },
        witness_lambda: hit.then(|| lambdas[arg].clone()),
    })
}

/// Unit vectors in `R^l`: an even circle grid for `l = 2`, a Fibonacci
/// sphere for `l = 3`, seeded uniform samples otherwise.
fn sphere_grid<T: Scalar>(l: usize, density: usize, seed: u64) -> Vec<Vec<T>> {
    use rand::{Rng, SeedableRng};
    let k = density.max(4);
    match l {
        2 => (0..k)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / k as f64;
                vec![T::lit(a.cos()), T::lit(a.sin())]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..k)
                .map(|i| {
                    let y = 1.0 - 2.0 * (i as f64 + 0.5) / k as f64;
                    let r = (1.0 - y * y).sqrt();
                    let th = golden * i as f64;
                    vec![T::lit(r * th.cos()), T::lit(y), T::lit(r * th.sin())]
                })
                .collect()
        }
        _ => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut out = Vec::with_capacity(k);
            while out.len() < k {
                let v: Vec<f64> = (0..l).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                if nv > 1e-3 && nv <= 1.0 {
                    out.push(v.iter().map(|a| T::lit(a / nv)).collect());
                }
            }
            out
        }
    }
}

/// Direction search result.
#[derive(Debug, Clone, PartialEq)]
pub struct Hbar<T = f64> {
    /// Present exactly when `margin > 0`.
    pub hbar: Option<Vec<T>>,
    /// `min_v -<v, h>` over vertices of the inequality sums; `+inf` when there
    /// are none, `-inf` when the equality span is the whole space.
    pub margin: T,
    pub span_rank: usize,
}

/// Finds `h` with `h` orthogonal to every equality sum and `<v, h> <= -t`
/// for every vertex of every inequality sum, maximizing `t` under
/// `||h||_inf <= 1`. Among maximizers the one of least l1 norm is returned.
pub fn find_hbar<T: Scalar>(
    dim: usize,
    eq_sums: &[Polytope<T>],
    ineq_sums: &[Polytope<T>],
) -> Result<Hbar<T>, CqError> {
    for p in eq_sums.iter().chain(ineq_sums) {
        if p.dim() != dim {
            return Err(GeometryError::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            }
            .into());
        }
    }
    let pts: Vec<Vec<T>> = eq_sums.iter().flat_map(|p| p.vertices().iter().cloned()).collect();
    let basis = span_basis(&pts);
    let span_rank = basis.len();
    let complement = orthogonal_complement(&basis, dim);
    if ineq_sums.is_empty() {
        return Ok(Hbar {
            hbar: Some(complement.first().cloned().unwrap_or_else(|| vec![T::zero(); dim])),
            margin: T::infinity(),
            span_rank,
        });
    }
    if complement.is_empty() {
        return Ok(Hbar {
            hbar: None,
            margin: T::neg_infinity(),
            span_rank,
        });
    }
    let verts: Vec<&Vec<T>> = ineq_sums.iter().flat_map(|p| p.vertices()).collect();

    // Stage 1: maximize t.
    let mut c = vec![T::zero(); dim + 1];
    c[dim] = T::one();
    let mut lp = LinearProgram::new(dim + 1).maximize(c);
    for i in 0..dim {
        lp.bounds(i, Some(-T::one()), Some(T::one()));
    }
    for v in &verts {
        let mut row = (*v).clone();
        row.push(T::one());
        lp.le(row, T::zero());
    }
    for nk in &basis {
        let mut row = nk.clone();
        row.push(T::zero());
        lp.eq(row, T::zero());
    }
    let t_star = match lp.solve() {
        LpOutcome::Optimal { objective, .. } => objective,
        LpOutcome::Infeasible => T::neg_infinity(),
        LpOutcome::Unbounded => T::infinity(),
    };
    if t_star <= T::membership_tol() {
        return Ok(Hbar {
            hbar: None,
            margin: t_star.min(T::zero()),
            span_rank,
        });
    }

    // Stage 2: least l1 norm among (near-)maximizers; variables h, u.
    let t_fix = t_star * (T::one() - T::lit(1e-7));
    let mut c = vec![T::zero(); 2 * dim];
    for ci in c.iter_mut().skip(dim) {
        *ci = T::one();
    }
    let mut lp = LinearProgram::new(2 * dim).minimize(c);
    for i in 0..dim {
        lp.bounds(i, Some(-T::one()), Some(T::one()));
        lp.nonnegative(dim + i);
        let mut a = vec![T::zero(); 2 * dim];
        a[dim + i] = T::one();
        a[i] = -T::one();
        lp.ge(a.clone(), T::zero());
        a[i] = T::one();
        lp.ge(a, T::zero());
    }
    for v in &verts {
        let mut row = (*v).clone();
        row.extend(std::iter::repeat(T::zero()).take(dim));
        lp.le(row, -t_fix);
    }
    for nk in &basis {
        let mut row = nk.clone();
        row.extend(std::iter::repeat(T::zero()).take(dim));
        lp.eq(row, T::zero());
    }
    let mut h: Vec<T> = match lp.solve() {
        LpOutcome::Optimal { point, .. } => point[..dim].to_vec(),
        _ => {
            return Ok(Hbar {
                hbar: None,
                margin: T::zero(),
                span_rank,
            })
        }
    };
    for nk in &basis {
        let a = dot(nk, &h);
        for (hi, ni) in h.iter_mut().zip(nk) {
            *hi -= a * *ni;
        }
    }
    let margin_of = |h: &[T]| verts.iter().map(|v| -dot(v, h)).fold(T::infinity(), T::min);
    // Undo the stage-2 slack without leaving the box.
    let m0 = margin_of(&h);
    let inf = h.iter().fold(T::zero(), |a, x| a.max(x.abs()));
    if m0 > T::zero() && inf > T::zero() {
        let k = (t_star / m0).min(T::one() / inf);
        if k > T::one() {
            h.iter_mut().for_each(|x| *x *= k);
        }
    }
    let margin = margin_of(&h);
    Ok(Hbar {
        hbar: (margin > T::zero()).then_some(h),
        margin,
        span_rank,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MfcqReport<T = f64> {
    pub full_rank: bool,
    pub rank: Option<FullRank<T>>,
    pub hbar: Option<Vec<T>>,
    pub margin: T,
    pub active_set: Vec<usize>,
    pub span_rank: usize,
    pub verdict: bool,
    /// Convexity and closedness of the dual-ball image is assumed, not checked.
    pub closed_convex_assumed: bool,
    pub warnings: Vec<String>,
}

impl<T: Scalar> MfcqReport<T> {
    pub fn det_range(&self) -> Option<(T, T)> {
        match self.rank.as_ref().map(|r| &r.certificate) {
            Some(RankCertificate::DetRange(d)) => Some((d.min, d.max)),
            _ => None,
        }
    }
}

/// Grid density used by [`qd_mfcq`] for the sphere test.
pub fn default_grid_density(l: usize) -> usize {
    if l == 2 {
        720
    } else {
        10_000
    }
}

/// The constraint qualification at `b` for the system with `y = 0`, `z = 0`.
pub fn qd_mfcq<T: Scalar>(s: &SystemSpec<T>, b: &Binding<T>) -> Result<MfcqReport<T>, CqError> {
    qd_mfcq_with(s, b, T::membership_tol(), 0)
}

pub fn qd_mfcq_with<T: Scalar>(
    s: &SystemSpec<T>,
    b: &Binding<T>,
    tol: T,
    seed: u64,
) -> Result<MfcqReport<T>, CqError> {
    let n = b.point.len();
    let fvals = s
        .equalities
        .iter()
        .map(|e| e.eval(b))
        .collect::<Result<Vec<_>, _>>()?;
    let gvals = s
        .inequalities
        .iter()
        .map(|e| e.eval(b))
        .collect::<Result<Vec<_>, _>>()?;
    if fvals.iter().any(|v| v.abs() > tol) || gvals.iter().any(|v| *v > tol) {
        return Err(CqError::Infeasible {
            equalities: fvals.iter().map(|v| v.as_f64()).collect(),
            inequalities: gvals.iter().map(|v| v.as_f64()).collect(),
        });
    }
    let active = active_inequalities(s, b, tol)?;
    let eq_sums = if s.equalities.is_empty() {
        Vec::new()
    } else {
        qd_matrix_at(&s.equalities, b)?.plus_rows()
    };
    let mut ineq_sums = Vec::with_capacity(active.len());
    for &i in &active {
        ineq_sums.push(qd_plus_set(&s.inequalities[i].qd_at(b)?));
    }
    let rank = if eq_sums.is_empty() {
        None
    } else {
        Some(full_rank_general(&eq_sums, default_grid_density(eq_sums.len()), seed)?)
    };
    let full_rank = rank.as_ref().map_or(true, |r| r.full_rank);
    let hb = find_hbar(n, &eq_sums, &ineq_sums)?;
    let mut warnings = Vec::new();
    if hb.span_rank == n && !eq_sums.is_empty() {
        warnings.push(format!(
            "equality sums span all of R^{n}: no admissible direction exists; in dimension n >= 3 the qualification is known not to be necessary for regularity"
        ));
    }
    if let Some(RankCertificate::Grid {
        lipschitz_certified: false,
        ..
    }) = rank.as_ref().map(|r| &r.certificate)
    {
        if full_rank {
            warnings.push("linear independence certified up to grid only".to_string());
        }
    }
    Ok(MfcqReport {
        verdict: full_rank && hb.margin > T::zero(),
        full_rank,
        rank,
        hbar: hb.hbar,
        margin: hb.margin,
        active_set: active,
        span_rank: hb.span_rank,
        closed_convex_assumed: true,
        warnings,
    })
}

/// Bisection for the point in `[a, b]` where `pred` changes value.
/// `pred(a) != pred(b)` is required.
pub fn locate_flip<T: Scalar>(pred: impl Fn(T) -> bool, a: T, b: T, tol: T) -> Option<T> {
    let (mut lo, mut hi) = (a, b);
    let plo = pred(lo);
    if plo == pred(hi) {
        return None;
    }
    while (hi - lo).abs() > tol {
        let mid = (lo + hi) / T::two();
        if pred(mid) == plo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo + hi) / T::two())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(a: &[f64], b: &[f64]) -> Polytope<f64> {
        Polytope::segment(a.to_vec(), b.to_vec()).unwrap()
    }

    fn pt(a: &[f64]) -> Polytope<f64> {
        Polytope::point(a.to_vec()).unwrap()
    }

    #[test]
    fn active_set_examples() {
        let s = SystemSpec::<f64>::parse(2, &[], &["x1", "x1 - 1", "x2 + 1e-9"]).unwrap();
        let b = s.binding(&[0.0, 0.0]);
        assert_eq!(active_inequalities(&s, &b, 1e-9).unwrap(), vec![0, 2]);
    }

    #[test]
    fn singleton_rows_give_jacobian_determinant() {
        let r = full_rank_det_range(&[pt(&[1.0, -1.0]), pt(&[1.0, 2.0])]).unwrap();
        assert_eq!((r.min, r.max), (3.0, 3.0));
        assert!(r.full_rank);
    }

    #[test]
    fn det_budget_is_enforced() {
        let rows = [seg(&[0.0, 1.0], &[1.0, 0.0]), seg(&[0.0, 1.0], &[1.0, 0.0])];
        assert!(matches!(
            full_rank_det_range_with(&rows, 3, 1e-9),
            Err(CqError::Budget { count: 4, cap: 3 })
        ));
    }

    #[test]
    fn two_rows_grid_orthants_and_det_agree() {
        let rows = [seg(&[1.0, 0.0], &[2.0, 0.0]), seg(&[0.0, 1.0], &[0.0, 2.0])];
        let d = full_rank_det_range(&rows).unwrap();
        assert!(d.full_rank);
        assert!(full_rank_orthants(&rows).unwrap().full_rank);
        let g = full_rank_grid(&rows, 720, 0).unwrap();
        assert!(g.full_rank);
        assert!(matches!(
            g.certificate,
            RankCertificate::Grid {
                lipschitz_certified: true,
                ..
            }
        ));
        let bad = [seg(&[1.0, 0.0], &[2.0, 0.0]), seg(&[-1.0, 1.0], &[-1.0, -1.0])];
        assert!(!full_rank_det_range(&bad).unwrap().full_rank);
        let o = full_rank_orthants(&bad).unwrap();
        assert!(!o.full_rank);
        let lam = o.witness_lambda.unwrap();
        assert!((lam[0] - lam[1]).abs() < 1e-9);
    }

    #[test]
    fn dependent_rows_off_the_grid() {
        let rows = [pt(&[1.0, 1.0, 0.0]), pt(&[2.0, 2.0, 0.0])];
        let r = full_rank_general(&rows, 720, 0).unwrap();
        assert!(!r.full_rank);
        let lam = r.witness_lambda.unwrap();
        assert!((lam[0] + 2.0 * lam[1]).abs() < 1e-9);
        // The circle grid misses lambda = (2, -1)/sqrt(5).
        assert!(full_rank_grid(&rows, 720, 0).unwrap().full_rank);
    }

    #[test]
    fn orthogonal_singletons_in_three_space() {
        let rows = [pt(&[1.0, 0.0, 0.0]), pt(&[0.0, 1.0, 0.0])];
        for density in [8, 100, 720] {
            assert!(full_rank_general(&rows, density, 0).unwrap().full_rank);
        }
    }

    #[test]
    fn hbar_separates_a_point() {
        let h = find_hbar(2, &[], &[pt(&[1.0, 0.0])]).unwrap();
        assert_eq!(h.hbar, Some(vec![-1.0, 0.0]));
        assert!((h.margin - 1.0).abs() < 1e-6);
    }

    #[test]
    fn hbar_trivial_complement_fails() {
        let eq = [seg(&[1.0, -1.0], &[-1.0, -1.0])];
        let h = find_hbar(2, &eq, &[seg(&[0.0, 0.0], &[1.0, 0.0])]).unwrap();
        assert_eq!(h.span_rank, 2);
        assert!(h.hbar.is_none());
        assert_eq!(h.margin, f64::NEG_INFINITY);
    }

    #[test]
    fn hbar_without_inequalities() {
        let h = find_hbar(2, &[pt(&[1.0, 1.0])], &[]).unwrap();
        assert_eq!(h.margin, f64::INFINITY);
        let v = h.hbar.unwrap();
        assert!((v[0] + v[1]).abs() < 1e-12 && (v[0] * v[0] + v[1] * v[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classical_mfcq_for_linear_system() {
        let s = SystemSpec::<f64>::parse(2, &["x1"], &["x2"]).unwrap();
        let r = qd_mfcq(&s, &s.binding(&[0.0, 0.0])).unwrap();
        assert!(r.verdict);
        assert_eq!(r.hbar, Some(vec![0.0, -1.0]));
        assert_eq!(r.active_set, vec![0]);
    }

    #[test]
    fn infeasible_base_point_is_rejected() {
        let s = SystemSpec::<f64>::parse(1, &["x1 - 1"], &[]).unwrap();
        assert!(matches!(
            qd_mfcq(&s, &s.binding(&[0.0])),
            Err(CqError::Infeasible { .. })
        ));
    }

    #[test]
    fn flip_bisection() {
        let p = locate_flip(|x: f64| x * x < 2.0, 0.0, 3.0, 1e-10).unwrap();
        assert!((p - 2f64.sqrt()).abs() < 1e-9);
        assert!(locate_flip(|x: f64| x > 10.0, 0.0, 3.0, 1e-10).is_none());
    }
}
