//! Dense-sample checks of the error bound `d(x, S(y, z)) <= K * residual`.
//!
//! The solution set `S(y, z) = {x : F(x) = y, g(x) <= z}` is approximated
//! per target by a point cloud extracted from a precomputed grid of `F` and
//! `g` values (sign changes of `f - y` along grid edges, or the boundary of
//! the feasible region when there are no equalities). Distances are then
//! refined by bisection along rays, which produces points of `S` up to
//! rounding, so the refined distance is an upper bound on `d(x, S)`.

use rayon::prelude::*;

use super::{l1_residual, psi_expr, Norm, RegularityError, SystemSpec};
use crate::qd::steepest_rate;
use crate::scalar::{norm2, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig<T = f64> {
    pub k: T,
    /// Half-width of the sampled neighbourhood (x and targets).
    pub r: T,
    /// Points per axis of the x grid (forced odd).
    pub grid: usize,
    /// Points per axis of the target grid (forced odd).
    pub target_grid: usize,
    /// Half-width of the box searched for solutions.
    pub search_radius: T,
    /// Number of grid nodes used to sample the solution set.
    pub budget: usize,
    pub tol: T,
}

impl<T: Scalar> ScanConfig<T> {
    pub fn new(k: T, r: T) -> Self {
        ScanConfig {
            k,
            r,
            grid: 41,
            target_grid: 41,
            search_radius: T::lit(4.0) * r,
            budget: 1_000_000,
            tol: T::membership_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSample<T = f64> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub z: Vec<T>,
    /// `d(x, S(y, z))`, `+inf` when no solution was found in the search box.
    pub distance: T,
    pub residual: T,
    pub ratio: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridReport<T = f64> {
    pub k: T,
    pub worst_ratio: T,
    pub worst: Option<GridSample<T>>,
    pub violators: usize,
    pub samples: usize,
    /// Targets whose solution set was empty inside the search box.
    pub empty_targets: usize,
    pub resolution: T,
}

impl<T: Scalar> GridReport<T> {
    pub fn passed(&self) -> bool {
        self.violators == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioPoint<T = f64> {
    pub y: Vec<T>,
    pub z: Vec<T>,
    pub distance: T,
    pub residual: T,
    pub ratio: T,
}

fn odd(k: usize) -> usize {
    let k = k.max(1);
    if k % 2 == 0 {
        k + 1
    } else {
        k
    }
}

fn linspace<T: Scalar>(c: T, half: T, k: usize) -> Vec<T> {
    if k == 1 {
        return vec![c];
    }
    let denom = T::lit((k - 1) as f64);
    (0..k)
        .map(|i| c - half + T::two() * half * T::lit(i as f64) / denom)
        .collect()
}

fn product<T: Scalar>(axes: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for p in &out {
            for v in axis {
                let mut q = p.clone();
                q.push(*v);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

fn compass<T: Scalar>(n: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    for p in product(&vec![vec![-T::one(), T::zero(), T::one()]; n]) {
        let nrm = norm2(&p);
        if nrm > T::zero() {
            out.push(p.iter().map(|v| *v / nrm).collect());
        }
    }
    out
}

/// Uniform-bucket nearest-neighbour index over a point cloud.
struct Buckets<T> {
    lo: Vec<T>,
    cell: T,
    side: usize,
    cells: Vec<Vec<usize>>,
    points: Vec<Vec<T>>,
}

impl<T: Scalar> Buckets<T> {
    fn new(points: Vec<Vec<T>>, lo: Vec<T>, width: T) -> Self {
        let n = lo.len();
        let target = (points.len() as f64 / 2.0).max(1.0);
        let cap = (65536f64).powf(1.0 / n as f64).floor().max(1.0);
        let side = target.powf(1.0 / n as f64).floor().clamp(1.0, cap) as usize;
        let cell = width / T::lit(side as f64);
        let mut cells = vec![Vec::new(); side.pow(n as u32)];
        let mut b = Buckets {
            lo,
            cell,
            side,
            cells: Vec::new(),
            points: Vec::new(),
        };
        for (i, p) in points.iter().enumerate() {
            let c = b.cell_of(p);
            cells[b.flat(&c)].push(i);
        }
        b.cells = cells;
        b.points = points;
        b
    }

    fn cell_of(&self, p: &[T]) -> Vec<usize> {
        p.iter()
            .zip(&self.lo)
            .map(|(x, l)| {
                let k = ((*x - *l) / self.cell).floor().to_f64().unwrap_or(0.0);
                k.clamp(0.0, (self.side - 1) as f64) as usize
            })
            .collect()
    }

    fn flat(&self, c: &[usize]) -> usize {
        c.iter().fold(0, |acc, k| acc * self.side + k)
    }

    fn nearest(&self, q: &[T]) -> Option<(usize, T)> {
        if self.points.is_empty() {
            return None;
        }
        let n = q.len();
        let home = self.cell_of(q);
        let mut best: Option<(usize, T)> = None;
        for ring in 0..=self.side {
            let lo: Vec<usize> = home.iter().map(|c| c.saturating_sub(ring)).collect();
            let hi: Vec<usize> = home.iter().map(|c| (c + ring).min(self.side - 1)).collect();
            let mut idx = lo.clone();
            loop {
                let cheb = idx
                    .iter()
                    .zip(&home)
                    .map(|(a, b)| a.abs_diff(*b))
                    .max()
                    .unwrap_or(0);
                if cheb == ring {
                    for &i in &self.cells[self.flat(&idx)] {
                        let d = dist(&self.points[i], q);
                        if best.map_or(true, |(_, bd)| d < bd) {
                            best = Some((i, d));
                        }
                    }
                }
                let mut k = 0;
                loop {
                    if k == n {
                        break;
                    }
                    if idx[k] < hi[k] {
                        idx[k] += 1;
                        break;
                    }
                    idx[k] = lo[k];
                    k += 1;
                }
                if k == n {
                    break;
                }
            }
            if let Some((_, bd)) = best {
                if bd <= T::lit(ring as f64) * self.cell {
                    break;
                }
            }
        }
        best
    }
}

fn dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x - *y) * (*x - *y))
        .sum::<T>()
        .sqrt()
}

/// Grid of `F` and `g` values over a box, used to sample solution sets.
struct SolutionOracle<T> {
    sys: SystemSpec<T>,
    n: usize,
    side: usize,
    lo: Vec<T>,
    h: T,
    radius: T,
    f: Vec<T>,
    g: Vec<Vec<T>>,
    dirs: Vec<Vec<T>>,
    tol: T,
}

impl<T: Scalar> SolutionOracle<T> {
    fn new(
        sys: &SystemSpec<T>,
        center: &[T],
        radius: T,
        budget: usize,
        tol: T,
    ) -> Result<Self, RegularityError> {
        let sys = sys.substituted();
        let n = sys.n;
        if sys.l() > 1 {
            return Err(RegularityError::Unsupported(format!(
                "solution-set sampling needs at most one equality, got {}",
                sys.l()
            )));
        }
        if n == 0 || n > 3 {
            return Err(RegularityError::Unsupported(format!(
                "solution-set sampling needs 1 <= n <= 3, got {n}"
            )));
        }
        let mut side = (budget.max(27) as f64).powf(1.0 / n as f64).floor() as usize;
        if side % 2 == 0 {
            side -= 1;
        }
        let side = side.max(3);
        let lo: Vec<T> = center.iter().map(|c| *c - radius).collect();
        let h = T::two() * radius / T::lit((side - 1) as f64);
        let total = side.pow(n as u32);
        let values: Vec<(T, Vec<T>)> = (0..total)
            .into_par_iter()
            .map(|idx| {
                let x = node(idx, n, side, &lo, h);
                let (f, g) = sys.values(&x).expect("parameters substituted");
                (f.first().copied().unwrap_or(T::zero()), g)
            })
            .collect();
        let m = sys.m();
        let mut f = Vec::new();
        let mut g = vec![Vec::with_capacity(total); m];
        for (fv, gv) in values {
            if sys.l() == 1 {
                f.push(fv);
            }
            for (i, v) in gv.into_iter().enumerate() {
                g[i].push(v);
            }
        }
        Ok(SolutionOracle {
            sys,
            n,
            side,
            lo,
            h,
            radius,
            f,
            g,
            dirs: compass(n),
            tol,
        })
    }

    fn slack(&self, idx: usize, z: &[T]) -> T {
        self.g
            .iter()
            .zip(z)
            .map(|(gi, zi)| gi[idx] - *zi)
            .fold(T::neg_infinity(), T::max)
    }

    fn cloud(&self, y: &[T], z: &[T]) -> Vec<Vec<T>> {
        let total = self.side.pow(self.n as u32);
        let mut strides = vec![1usize; self.n];
        for d in (0..self.n.saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * self.side;
        }
        let has_eq = self.sys.l() == 1;
        let phi = |idx: usize| {
            if has_eq {
                self.f[idx] - y[0]
            } else {
                self.slack(idx, z)
            }
        };
        let mut out = Vec::new();
        for idx in 0..total {
            let a = phi(idx);
            if has_eq && a == T::zero() && (self.g.is_empty() || self.slack(idx, z) <= self.tol) {
                out.push(node(idx, self.n, self.side, &self.lo, self.h));
            }
            for d in 0..self.n {
                if (idx / strides[d]) % self.side == self.side - 1 {
                    continue;
                }
                let nb = idx + strides[d];
                let b = phi(nb);
                let crosses = if has_eq {
                    (a < T::zero() && b > T::zero()) || (a > T::zero() && b < T::zero())
                } else {
                    (a <= T::zero()) != (b <= T::zero())
                };
                if !crosses {
                    continue;
                }
                let t = a / (a - b);
                if has_eq && !self.g.is_empty() {
                    let feasible = self.g.iter().zip(z).all(|(gi, zi)| {
                        gi[idx] + t * (gi[nb] - gi[idx]) <= *zi + self.tol
                    });
                    if !feasible {
                        continue;
                    }
                }
                let mut p = node(idx, self.n, self.side, &self.lo, self.h);
                p[d] += t * self.h;
                out.push(p);
            }
        }
        out
    }

    /// Signed function whose zero set (or nonpositive set) is the target solution set.
    fn phi(&self, x: &[T], y: &[T], z: &[T]) -> (T, bool) {
        let (f, g) = self.sys.values(x).expect("parameters substituted");
        let feasible = g.iter().zip(z).all(|(a, b)| *a <= *b + self.tol);
        if self.sys.l() == 1 {
            (f[0] - y[0], feasible)
        } else {
            let s = g
                .iter()
                .zip(z)
                .map(|(a, b)| *a - *b)
                .fold(T::neg_infinity(), T::max);
            (s, s <= T::zero())
        }
    }

    /// Point of the solution set on the segment `[x, e]`, if the segment brackets one.
    fn bracket(&self, x: &[T], e: &[T], y: &[T], z: &[T]) -> Option<Vec<T>> {
        let has_eq = self.sys.l() == 1;
        let (pa, _) = self.phi(x, y, z);
        let (pb, fb) = self.phi(e, y, z);
        let side = |v: T, feas: bool| if has_eq { v > T::zero() } else { !feas };
        let sa = side(pa, pa <= T::zero());
        if has_eq && pb == T::zero() {
            return fb.then(|| e.to_vec());
        }
        if sa == side(pb, fb) {
            return None;
        }
        let mut a = x.to_vec();
        let mut b = e.to_vec();
        for _ in 0..50 {
            let mid: Vec<T> = a.iter().zip(&b).map(|(p, q)| (*p + *q) / T::two()).collect();
            let (pm, fm) = self.phi(&mid, y, z);
            if has_eq && pm == T::zero() {
                a = mid.clone();
                b = mid;
                break;
            }
            if side(pm, fm) == sa {
                a = mid;
            } else {
                b = mid;
            }
        }
        if has_eq {
            let q: Vec<T> = a.iter().zip(&b).map(|(p, q)| (*p + *q) / T::two()).collect();
            let (_, feas) = self.phi(&q, y, z);
            feas.then_some(q)
        } else {
            // The end on the feasible side.
            Some(if sa { b } else { a })
        }
    }

    fn distance(&self, x: &[T], y: &[T], z: &[T], index: &Buckets<T>) -> T {
        let near = index.nearest(x);
        let d0 = near.map_or(T::infinity(), |(_, d)| d);
        let reach = if d0.is_finite() {
            d0 * T::lit(1.001) + T::two() * self.h
        } else {
            T::two() * self.radius
        };
        let mut dirs: Vec<Vec<T>> = Vec::with_capacity(self.dirs.len() + 1);
        if let Some((i, d)) = near {
            if d > T::zero() {
                dirs.push(
                    index.points[i]
                        .iter()
                        .zip(x)
                        .map(|(p, q)| (*p - *q) / d)
                        .collect(),
                );
            }
        }
        dirs.extend(self.dirs.iter().cloned());
        let mut best = T::infinity();
        for u in &dirs {
            let e: Vec<T> = x.iter().zip(u).map(|(a, b)| *a + reach * *b).collect();
            if let Some(q) = self.bracket(x, &e, y, z) {
                best = best.min(dist(x, &q));
            }
        }
        if best.is_infinite() {
            best = d0;
        }
        best
    }

    fn index(&self, y: &[T], z: &[T]) -> Buckets<T> {
        Buckets::new(self.cloud(y, z), self.lo.clone(), T::two() * self.radius)
    }

    fn sample(&self, x: &[T], y: &[T], z: &[T], index: &Buckets<T>) -> GridSample<T> {
        let (f, g) = self.sys.values(x).expect("parameters substituted");
        let residual = l1_residual(&f, &g, y, z);
        // Residuals at rounding level carry no ratio information.
        let (distance, ratio) = if residual <= T::dedup_tol() {
            (T::zero(), T::zero())
        } else {
            let d = self.distance(x, y, z, index);
            (d, d / residual)
        };
        GridSample {
            x: x.to_vec(),
            y: y.to_vec(),
            z: z.to_vec(),
            distance,
            residual,
            ratio,
        }
    }
}

fn node<T: Scalar>(mut idx: usize, n: usize, side: usize, lo: &[T], h: T) -> Vec<T> {
    let mut x = vec![T::zero(); n];
    for d in (0..n).rev() {
        x[d] = lo[d] + h * T::lit((idx % side) as f64);
        idx /= side;
    }
    x
}

fn targets_around<T: Scalar>(s: &SystemSpec<T>, y0: &[T], r: T, k: usize) -> Vec<(Vec<T>, Vec<T>)> {
    let k = odd(k);
    let mut axes: Vec<Vec<T>> = y0.iter().map(|c| linspace(*c, r, k)).collect();
    axes.extend((0..s.m()).map(|_| linspace(T::zero(), r, k)));
    product(&axes)
        .into_iter()
        .map(|t| {
            let (y, z) = t.split_at(s.l());
            (y.to_vec(), z.to_vec())
        })
        .collect()
}

/// Checks `d(x, S(y, z)) <= K (||F(x) - y||_1 + sum [g_i(x) - z_i]_+)` over
/// `x in B(center, r)` and targets `y in F(center) + [-r, r]^l`, `z in [-r, r]^m`.
pub fn verify_regularity_grid<T: Scalar>(
    s: &SystemSpec<T>,
    center: &[T],
    cfg: &ScanConfig<T>,
) -> Result<GridReport<T>, RegularityError> {
    let oracle = SolutionOracle::new(s, center, cfg.search_radius, cfg.budget, cfg.tol)?;
    let (f0, _) = oracle.sys.values(center)?;
    let targets = targets_around(s, &f0, cfg.r, cfg.target_grid);
    let kx = odd(cfg.grid);
    let xs = product(&center.iter().map(|c| linspace(*c, cfg.r, kx)).collect::<Vec<_>>());
    let per_target: Vec<(Option<GridSample<T>>, usize, usize, bool)> = targets
        .par_iter()
        .map(|(y, z)| {
            let index = oracle.index(y, z);
            let empty = index.points.is_empty();
            let mut worst: Option<GridSample<T>> = None;
            let mut violators = 0;
            for x in &xs {
                let smp = oracle.sample(x, y, z, &index);
                if smp.ratio > cfg.k {
                    violators += 1;
                }
                if worst.as_ref().map_or(true, |w| smp.ratio > w.ratio) {
                    worst = Some(smp);
                }
            }
            (worst, violators, xs.len(), empty)
        })
        .collect();
    let mut report = GridReport {
        k: cfg.k,
        worst_ratio: T::zero(),
        worst: None,
        violators: 0,
        samples: 0,
        empty_targets: 0,
        resolution: oracle.h,
    };
    for (w, v, c, empty) in per_target {
        report.violators += v;
        report.samples += c;
        report.empty_targets += usize::from(empty);
        if let Some(w) = w {
            if report.worst.is_none() || w.ratio > report.worst_ratio {
                report.worst_ratio = w.ratio;
                report.worst = Some(w);
            }
        }
    }
    Ok(report)
}

/// Ratios `d(x, S(y, z)) / residual` at one point for a list of targets.
pub fn ratio_profile<T: Scalar>(
    s: &SystemSpec<T>,
    x: &[T],
    targets: &[(Vec<T>, Vec<T>)],
    cfg: &ScanConfig<T>,
) -> Result<Vec<RatioPoint<T>>, RegularityError> {
    let oracle = SolutionOracle::new(s, x, cfg.search_radius, cfg.budget, cfg.tol)?;
    for (y, z) in targets {
        s.check_targets(y, z)?;
    }
    Ok(targets
        .par_iter()
        .map(|(y, z)| {
            let index = oracle.index(y, z);
            let smp = oracle.sample(x, y, z, &index);
            RatioPoint {
                y: y.clone(),
                z: z.clone(),
                distance: smp.distance,
                residual: smp.residual,
                ratio: smp.ratio,
            }
        })
        .collect())
}

/// Empirical local error bound `sup d(x, S(0, 0)) / residual` over `B(center, r)`.
pub fn error_bound_estimate<T: Scalar>(
    s: &SystemSpec<T>,
    center: &[T],
    cfg: &ScanConfig<T>,
) -> Result<T, RegularityError> {
    let oracle = SolutionOracle::new(s, center, cfg.search_radius, cfg.budget, cfg.tol)?;
    let y = vec![T::zero(); s.l()];
    let z = vec![T::zero(); s.m()];
    let index = oracle.index(&y, &z);
    let kx = odd(cfg.grid);
    let xs = product(&center.iter().map(|c| linspace(*c, cfg.r, kx)).collect::<Vec<_>>());
    Ok(xs
        .par_iter()
        .map(|x| oracle.sample(x, &y, &z, &index).ratio)
        .collect::<Vec<_>>()
        .into_iter()
        .fold(T::zero(), T::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginInfimum<T = f64> {
    pub radius: T,
    pub margin: T,
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub z: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginScan<T = f64> {
    /// Infimum of the steepest-descent margin over sampled points off the
    /// graph, one entry per radius; the points form the witness path.
    pub infima: Vec<MarginInfimum<T>>,
    /// The margin infimum over the smallest ball is at most `floor`.
    pub consistent_with_non_regularity: bool,
    pub skipped: usize,
}

/// Infima of the margin over shrinking balls around `(center, F(center), 0)`.
#[allow(clippy::too_many_arguments)]
pub fn margin_infima<T: Scalar>(
    s: &SystemSpec<T>,
    center: &[T],
    radii: &[T],
    grid: usize,
    target_grid: usize,
    norm: Norm,
    floor: T,
) -> Result<MarginScan<T>, RegularityError> {
    let (f0, _) = s.values(center)?;
    let mut infima = Vec::new();
    let mut skipped = 0;
    for &rho in radii {
        let targets = targets_around(s, &f0, rho, target_grid);
        let xs = product(&center.iter().map(|c| linspace(*c, rho, odd(grid))).collect::<Vec<_>>());
        let results: Vec<(Option<MarginInfimum<T>>, usize)> = targets
            .par_iter()
            .map(|(y, z)| {
                let mut best: Option<MarginInfimum<T>> = None;
                let mut skip = 0;
                let psi = match psi_expr(s, y, z, norm) {
                    Ok(p) => p,
                    Err(_) => return (None, xs.len()),
                };
                for x in &xs {
                    let on_graph = psi.eval(x).map_or(true, |v| v <= T::zero());
                    if on_graph {
                        continue;
                    }
                    let Ok(q) = psi.qd_at(x) else {
                        skip += 1;
                        continue;
                    };
                    let (m, _) = steepest_rate(&q);
                    if best.as_ref().map_or(true, |b| m < b.margin) {
                        best = Some(MarginInfimum {
                            radius: rho,
                            margin: m,
                            x: x.clone(),
                            y: y.clone(),
                            z: z.clone(),
                        });
                    }
                }
                (best, skip)
            })
            .collect();
        let mut best: Option<MarginInfimum<T>> = None;
        for (b, k) in results {
            skipped += k;
            if let Some(b) = b {
                if best.as_ref().map_or(true, |c| b.margin < c.margin) {
                    best = Some(b);
                }
            }
        }
        if let Some(b) = best {
            infima.push(b);
        }
    }
    let consistent_with_non_regularity = infima.last().is_some_and(|m| m.margin <= floor);
    Ok(MarginScan {
        infima,
        consistent_with_non_regularity,
        skipped,
    })
}
