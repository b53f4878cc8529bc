//! Dense two-phase simplex for the small linear programs behind membership,
//! direction search, and multiplier feasibility.
//!
//! Pivoting follows Bland's rule (smallest eligible index for both the
//! entering column and ratio-test ties), so results are deterministic and the
//! method cannot cycle.

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Feasible,
    Infeasible,
    Unbounded,
}

/// Result of [`LinearProgram::solve`]. A point and objective exist exactly when
/// the program is feasible with a finite optimum.
#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { point: Vec<T>, objective: T },
    Infeasible,
    Unbounded,
}

impl<T: Copy> LpOutcome<T> {
    pub fn status(&self) -> LpStatus {
        match self {
            LpOutcome::Optimal { .. } => LpStatus::Feasible,
            LpOutcome::Infeasible => LpStatus::Infeasible,
            LpOutcome::Unbounded => LpStatus::Unbounded,
        }
    }

    pub fn point(&self) -> Option<&[T]> {
        match self {
            LpOutcome::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }

    pub fn objective(&self) -> Option<T> {
        match self {
            LpOutcome::Optimal { objective, .. } => Some(*objective),
            _ => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }
}

/// A linear program over `num_vars` variables. Variables are free unless
/// bounded with [`LinearProgram::bounds`] or [`LinearProgram::nonnegative`].
#[derive(Clone, Debug)]
pub struct LinearProgram<T> {
    num_vars: usize,
    objective: Vec<T>,
    maximize: bool,
    constraints: Vec<Constraint<T>>,
    lower: Vec<Option<T>>,
    upper: Vec<Option<T>>,
}

impl<T: Scalar> LinearProgram<T> {
    /// Feasibility problem (zero objective) with free variables.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![T::zero(); num_vars],
            maximize: false,
            constraints: Vec::new(),
            lower: vec![None; num_vars],
            upper: vec![None; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint<T>] {
        &self.constraints
    }

    pub fn minimize(mut self, c: Vec<T>) -> Self {
        assert_eq!(c.len(), self.num_vars, "objective length");
        self.objective = c;
        self.maximize = false;
        self
    }

    pub fn maximize(mut self, c: Vec<T>) -> Self {
        assert_eq!(c.len(), self.num_vars, "objective length");
        self.objective = c;
        self.maximize = true;
        self
    }

    pub fn bounds(&mut self, var: usize, lower: Option<T>, upper: Option<T>) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    pub fn nonnegative(&mut self, var: usize) -> &mut Self {
        self.bounds(var, Some(T::zero()), None)
    }

    pub fn add(&mut self, coeffs: Vec<T>, relation: Relation, rhs: T) -> &mut Self {
        assert_eq!(coeffs.len(), self.num_vars, "constraint length");
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn le(&mut self, coeffs: Vec<T>, rhs: T) -> &mut Self {
        self.add(coeffs, Relation::Le, rhs)
    }

    pub fn ge(&mut self, coeffs: Vec<T>, rhs: T) -> &mut Self {
        self.add(coeffs, Relation::Ge, rhs)
    }

    pub fn eq(&mut self, coeffs: Vec<T>, rhs: T) -> &mut Self {
        self.add(coeffs, Relation::Eq, rhs)
    }

    /// Largest violation of constraints and bounds at `x`.
    pub fn max_violation(&self, x: &[T]) -> T {
        let mut worst = T::zero();
        for c in &self.constraints {
            let lhs: T = c.coeffs.iter().zip(x).map(|(a, b)| *a * *b).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (j, xj) in x.iter().enumerate() {
            if let Some(lo) = self.lower[j] {
                worst = worst.max(lo - *xj);
            }
            if let Some(hi) = self.upper[j] {
                worst = worst.max(*xj - hi);
            }
        }
        worst
    }

    pub fn solve(&self) -> LpOutcome<T> {
        StandardForm::build(self).solve(self)
    }
}

/// How an original variable is expressed through nonnegative columns.
#[derive(Clone, Debug)]
struct VarMap<T> {
    offset: T,
    cols: Vec<(usize, T)>,
}

struct StandardForm<T> {
    maps: Vec<VarMap<T>>,
    /// Equality rows over nonnegative columns (slacks included).
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    /// Index of a +1 slack usable as the initial basic column, per row.
    initial_basic: Vec<Option<usize>>,
    cost: Vec<T>,
}

impl<T: Scalar> StandardForm<T> {
    fn build(lp: &LinearProgram<T>) -> Self {
        let mut maps = Vec::with_capacity(lp.num_vars);
        let mut ncols = 0usize;
        let mut bound_rows: Vec<(usize, T)> = Vec::new();
        for j in 0..lp.num_vars {
            match (lp.lower[j], lp.upper[j]) {
                (Some(lo), hi) => {
                    maps.push(VarMap {
                        offset: lo,
                        cols: vec![(ncols, T::one())],
                    });
                    if let Some(hi) = hi {
                        bound_rows.push((ncols, hi - lo));
                    }
                    ncols += 1;
                }
                (None, Some(hi)) => {
                    maps.push(VarMap {
                        offset: hi,
                        cols: vec![(ncols, -T::one())],
                    });
                    ncols += 1;
                }
                (None, None) => {
                    maps.push(VarMap {
                        offset: T::zero(),
                        cols: vec![(ncols, T::one()), (ncols + 1, -T::one())],
                    });
                    ncols += 2;
                }
            }
        }
        let structural = ncols;

        // Rows over structural columns, all expressed as `a y (rel) b`.
        let mut raw: Vec<(Vec<T>, Relation, T)> = Vec::new();
        for c in &lp.constraints {
            let mut a = vec![T::zero(); structural];
            let mut b = c.rhs;
            for (j, coef) in c.coeffs.iter().enumerate() {
                if *coef == T::zero() {
                    continue;
                }
                b -= *coef * maps[j].offset;
                for (col, sign) in &maps[j].cols {
                    a[*col] += *coef * *sign;
                }
            }
            raw.push((a, c.relation, b));
        }
        for (col, width) in bound_rows {
            let mut a = vec![T::zero(); structural];
            a[col] = T::one();
            raw.push((a, Relation::Le, width));
        }

        let n_slack = raw.iter().filter(|r| r.1 != Relation::Eq).count();
        let total = structural + n_slack;
        let mut rows = Vec::with_capacity(raw.len());
        let mut rhs = Vec::with_capacity(raw.len());
        let mut initial_basic = Vec::with_capacity(raw.len());
        let mut slack = structural;
        for (a, rel, b) in raw {
            let mut row = a;
            row.resize(total, T::zero());
            let mut b = b;
            let mut slack_col = None;
            match rel {
                Relation::Le => {
                    row[slack] = T::one();
                    slack_col = Some(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -T::one();
                    slack_col = Some(slack);
                    slack += 1;
                }
                Relation::Eq => {}
            }
            if b < T::zero() {
                for v in row.iter_mut() {
                    *v = -*v;
                }
                b = -b;
            }
            let basic = slack_col.filter(|&s| row[s] == T::one());
            rows.push(row);
            rhs.push(b);
            initial_basic.push(basic);
        }

        let sign = if lp.maximize { -T::one() } else { T::one() };
        let mut cost = vec![T::zero(); total];
        for (j, cj) in lp.objective.iter().enumerate() {
            let cj = *cj * sign;
            for (col, s) in &maps[j].cols {
                cost[*col] += cj * *s;
            }
        }

        StandardForm {
            maps,
            rows,
            rhs,
            initial_basic,
            cost,
        }
    }

    fn solve(self, lp: &LinearProgram<T>) -> LpOutcome<T> {
        let m = self.rows.len();
        let n = self.cost.len();
        let n_art = self.initial_basic.iter().filter(|b| b.is_none()).count();
        let width = n + n_art;
        let eps = T::pivot_tol();

        let mut tab: Vec<Vec<T>> = Vec::with_capacity(m);
        let mut basis: Vec<usize> = Vec::with_capacity(m);
        let mut art = n;
        for i in 0..m {
            let mut row = self.rows[i].clone();
            row.resize(width, T::zero());
            match self.initial_basic[i] {
                Some(s) => basis.push(s),
                None => {
                    row[art] = T::one();
                    basis.push(art);
                    art += 1;
                }
            }
            row.push(self.rhs[i]);
            tab.push(row);
        }

        let mut tableau = Tableau {
            tab,
            basis,
            width,
            eps,
        };

        if n_art > 0 {
            let mut phase1 = vec![T::zero(); width];
            for c in phase1.iter_mut().skip(n) {
                *c = T::one();
            }
            let mut d = tableau.reduced_costs(&phase1);
            if tableau.run(&mut d, width).is_err() {
                // Phase 1 is bounded below by zero.
                return LpOutcome::Infeasible;
            }
            let infeas = -d[width];
            let rhs_scale = self
                .rhs
                .iter()
                .fold(T::one(), |s, b| s.max(b.abs()));
            if infeas > T::membership_tol() * rhs_scale {
                return LpOutcome::Infeasible;
            }
            tableau.drive_out_artificials(n);
        }

        let mut cost = self.cost.clone();
        cost.resize(width, T::zero());
        let mut d = tableau.reduced_costs(&cost);
        if tableau.run(&mut d, n).is_err() {
            return LpOutcome::Unbounded;
        }

        let mut y = vec![T::zero(); width];
        for (i, &b) in tableau.basis.iter().enumerate() {
            y[b] = tableau.tab[i][width].max(T::zero());
        }
        let x: Vec<T> = self
            .maps
            .iter()
            .map(|m| {
                m.cols
                    .iter()
                    .fold(m.offset, |acc, (col, s)| acc + *s * y[*col])
            })
            .collect();
        let objective: T = lp.objective.iter().zip(&x).map(|(c, v)| *c * *v).sum();
        LpOutcome::Optimal {
            point: x,
            objective,
        }
    }
}

struct Tableau<T> {
    /// Rows `[a_1 .. a_width | b]`.
    tab: Vec<Vec<T>>,
    basis: Vec<usize>,
    width: usize,
    eps: T,
}

struct UnboundedRay;

impl<T: Scalar> Tableau<T> {
    fn reduced_costs(&self, cost: &[T]) -> Vec<T> {
        let mut d: Vec<T> = cost.to_vec();
        d.push(T::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != T::zero() {
                for (dj, a) in d.iter_mut().zip(&self.tab[i]) {
                    *dj -= cb * *a;
                }
            }
        }
        d
    }

    fn pivot(&mut self, d: &mut [T], r: usize, col: usize) {
        let p = self.tab[r][col];
        for v in self.tab[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.tab[r].clone();
        for (i, row) in self.tab.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col];
            if f != T::zero() {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * *pv;
                }
                row[col] = T::zero();
            }
        }
        let f = d[col];
        if f != T::zero() {
            for (v, pv) in d.iter_mut().zip(&pivot_row) {
                *v -= f * *pv;
            }
            d[col] = T::zero();
        }
        self.basis[r] = col;
    }

    /// Runs simplex iterations over columns `< allowed`.
    fn run(&mut self, d: &mut [T], allowed: usize) -> Result<(), UnboundedRay> {
        let max_iter = 50_000 + 50 * (self.tab.len() + self.width);
        for _ in 0..max_iter {
            let entering = (0..allowed).find(|&j| d[j] < -self.eps);
            let Some(col) = entering else {
                return Ok(());
            };
            let mut best: Option<(usize, T)> = None;
            for (i, row) in self.tab.iter().enumerate() {
                let a = row[col];
                if a > self.eps {
                    let ratio = row[self.width] / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= self.eps * (T::one() + br.abs());
                            if ratio < br && !tie {
                                Some((i, ratio))
                            } else if tie && self.basis[i] < self.basis[bi] {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                None => return Err(UnboundedRay),
                Some((r, _)) => self.pivot(d, r, col),
            }
        }
        Ok(())
    }

    /// Pivots basic artificial columns (index `>= first_art`) out of the basis,
    /// dropping rows that turn out to be redundant.
    fn drive_out_artificials(&mut self, first_art: usize) {
        let mut i = 0;
        while i < self.tab.len() {
            if self.basis[i] >= first_art {
                let col = (0..first_art).find(|&j| self.tab[i][j].abs() > self.eps);
                match col {
                    Some(j) => {
                        let mut dummy = vec![T::zero(); self.width + 1];
                        self.pivot(&mut dummy, i, j);
                        i += 1;
                    }
                    None => {
                        self.tab.remove(i);
                        self.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }
}
