//! Subcommand implementations. Each returns a [`Report`] or a [`CliError`]
//! carrying the exit code.

use quasidiff::cq::{qd_mfcq_with, CqError, RankCertificate};
use quasidiff::expr::qd_matrix_at;
use quasidiff::optimality::{
    default_c_ladder, error_bound_pathway, optimality_report_with, Pathway, ProgramQd, Selection,
    SelectionVerdict,
};
use quasidiff::qd::qd_plus_set;
use quasidiff::regularity::scan::{margin_infima, verify_regularity_grid, ScanConfig};
use quasidiff::regularity::{regularity_at, RegularityError};
use quasidiff::Polytope;
use thiserror::Error;

use crate::problem::{parse_list, parse_target, InputError, ProblemFile};
use crate::report::{Num, Report, Section, Value};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Limit(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Limit(_) => 1,
            CliError::Input(_) => 2,
        }
    }
}

impl From<InputError> for CliError {
    fn from(e: InputError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

fn regularity_err(e: RegularityError) -> CliError {
    match e {
        RegularityError::Unsupported(_) => CliError::Limit(e.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

fn cq_err(e: CqError) -> CliError {
    match e {
        CqError::Budget { .. } => CliError::Limit(e.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

/// Settings common to every command.
#[derive(Debug, Clone)]
pub struct Context {
    pub file: String,
    pub seed: u64,
    pub tol: f64,
}

impl Context {
    fn report(&self, command: &str, sections: Vec<Section>, verdict: String) -> Report {
        Report {
            command: command.into(),
            file: self.file.clone(),
            seed: self.seed,
            tol: Num(self.tol),
            sections,
            verdict,
        }
    }
}

fn problem_section(pf: &ProblemFile, x: &[f64]) -> Section {
    let mut s = Section::new("problem");
    s.push("n", Value::Int(pf.n as u64));
    for (name, v) in &pf.params {
        s.push(format!("param {name}"), Value::num(*v));
    }
    for (label, e) in pf.expressions() {
        s.push(label, Value::Text(e.to_string()));
    }
    s.push("x", Value::vector(x));
    s
}

fn compass(n: usize) -> Vec<Vec<f64>> {
    if n == 2 {
        let d = std::f64::consts::FRAC_1_SQRT_2;
        vec![
            vec![1.0, 0.0],
            vec![d, d],
            vec![0.0, 1.0],
            vec![-d, d],
            vec![-1.0, 0.0],
            vec![-d, -d],
            vec![0.0, -1.0],
            vec![d, -d],
        ]
    } else {
        (0..n)
            .flat_map(|i| {
                [1.0, -1.0].map(|s| {
                    let mut e = vec![0.0; n];
                    e[i] = s;
                    e
                })
            })
            .collect()
    }
}

pub fn cmd_qd(ctx: &Context, pf: &ProblemFile, at: Option<&str>, dirs: &[String]) -> Result<Report, CliError> {
    let x = pf.point_or(at)?;
    let dirs: Vec<Vec<f64>> = if !dirs.is_empty() {
        dirs.iter()
            .map(|d| parse_list(d).map_err(|m| CliError::Input(format!("--dir: {m}"))))
            .collect::<Result<_, _>>()?
    } else if let Some(v) = pf.check_vectors("dirs")? {
        v
    } else {
        compass(pf.n)
    };
    if let Some(d) = dirs.iter().find(|d| d.len() != pf.n) {
        return Err(CliError::Input(format!(
            "direction has {} coordinates, expected n = {}",
            d.len(),
            pf.n
        )));
    }
    let mut sections = vec![problem_section(pf, &x)];
    let exprs = pf.expressions();
    if exprs.is_empty() {
        return Err(CliError::Input("no expressions in [problem]".into()));
    }
    let b = quasidiff::Binding {
        point: x.clone(),
        params: pf.params.clone(),
    };
    for (label, e) in exprs {
        let q = e.qd_at(&b).map_err(input)?;
        let mut s = Section::new(label);
        s.push("value", Value::num(e.eval(&b).map_err(input)?));
        s.push("sub", Value::points(q.sub().vertices()));
        s.push("sup", Value::points(q.sup().vertices()));
        for (k, h) in dirs.iter().enumerate() {
            s.push(format!("h{}", k + 1), Value::vector(h));
            s.push(format!("dd{}", k + 1), Value::num(q.dd(h).map_err(input)?));
        }
        sections.push(s);
    }
    Ok(ctx.report("qd", sections, "evaluated".into()))
}

pub fn cmd_slope(ctx: &Context, pf: &ProblemFile, at: Option<&str>, target: Option<&str>) -> Result<Report, CliError> {
    let x = pf.point_or(at)?;
    let s = pf.system()?;
    let (y, z) = match target.or(pf.check_str("target")) {
        Some(t) => parse_target(t).map_err(|m| CliError::Input(format!("target: {m}")))?,
        None => (vec![0.0; s.l()], vec![0.0; s.m()]),
    };
    let k = pf.check_f64("K", 2.0)?;
    let r = regularity_at(&s, &x, &y, &z, k, pf.norm()?, Some(ctx.seed)).map_err(regularity_err)?;
    let mut sec = Section::new("slope");
    sec.push("y", Value::vector(&y))
        .push("z", Value::vector(&z))
        .push("psi", Value::num(r.psi))
        .push("outside_graph", Value::Bool(r.outside_graph))
        .push("margin", Value::num(r.condition4_margin))
        .push("witness_w", Value::vector(&r.witness_w))
        .push("K", Value::num(k))
        .push("holds", Value::Bool(r.holds))
        .push("K_estimate", Value::num(r.k_estimate));
    if let Some(v) = r.sampled_slope {
        sec.push("sampled_slope", Value::num(v));
    }
    if let Some(v) = r.slope_positive {
        sec.push("slope_positive", Value::Bool(v));
    }
    let verdict = if !r.outside_graph {
        "target is on the graph at x; the slope condition does not apply".to_string()
    } else if r.holds {
        format!("steepest-descent condition holds at K = {k}")
    } else {
        format!("steepest-descent condition fails at K = {k}")
    };
    Ok(ctx.report("slope", vec![problem_section(pf, &x), sec], verdict))
}

pub fn cmd_mfcq(ctx: &Context, pf: &ProblemFile, at: Option<&str>) -> Result<Report, CliError> {
    let x = pf.point_or(at)?;
    let s = pf.system()?;
    let b = s.binding(&x);
    let r = qd_mfcq_with(&s, &b, ctx.tol, ctx.seed).map_err(cq_err)?;
    let mut sums = Section::new("sums");
    if !s.equalities.is_empty() {
        let rows = qd_matrix_at(&s.equalities, &b).map_err(input)?.plus_rows();
        for (j, p) in rows.iter().enumerate() {
            sums.push(format!("f{}", j + 1), Value::points(p.vertices()));
        }
    }
    for &i in &r.active_set {
        let p: Polytope<f64> = qd_plus_set(&s.inequalities[i].qd_at(&b).map_err(input)?);
        sums.push(format!("g{}", i + 1), Value::points(p.vertices()));
    }
    let mut rank = Section::new("rank");
    rank.push("full_rank", Value::Bool(r.full_rank));
    if let Some(fr) = &r.rank {
        match &fr.certificate {
            RankCertificate::Exact { distance } => {
                rank.push("certificate", Value::Text("projection".into()))
                    .push("distance", Value::num(*distance));
            }
            RankCertificate::DetRange(d) => {
                rank.push("certificate", Value::Text("determinant range".into()))
                    .push("det_min", Value::num(d.min))
                    .push("det_max", Value::num(d.max))
                    .push("tuples", Value::Int(d.tuples as u64));
            }
            RankCertificate::TooManyRows => {
                rank.push("certificate", Value::Text("more rows than dimensions".into()));
            }
            RankCertificate::Orthants { lps } => {
                rank.push("certificate", Value::Text("sign-orthant LPs".into()))
                    .push("lps", Value::Int(*lps as u64));
            }
            RankCertificate::Grid {
                directions,
                min_distance,
                lipschitz_certified,
            } => {
                rank.push("certificate", Value::Text("sphere grid".into()))
                    .push("directions", Value::Int(*directions as u64))
                    .push("min_distance", Value::num(*min_distance))
                    .push("lipschitz_certified", Value::Bool(*lipschitz_certified));
            }
        }
        if let Some(l) = &fr.witness_lambda {
            rank.push("dependence_lambda", Value::vector(l));
        }
    }
    let mut dir = Section::new("direction");
    dir.push("active_set", Value::indices(&r.active_set))
        .push("span_rank", Value::Int(r.span_rank as u64))
        .push(
            "hbar",
            match &r.hbar {
                Some(h) => Value::vector(h),
                None => Value::Text("none".into()),
            },
        )
        .push("margin", Value::num(r.margin));
    let mut caveats = Section::new("caveats");
    caveats.push("closed_convex_assumed", Value::Bool(r.closed_convex_assumed));
    for (k, w) in r.warnings.iter().enumerate() {
        caveats.push(format!("warning{}", k + 1), Value::Text(w.clone()));
    }
    let verdict = if r.verdict {
        "qualification holds".to_string()
    } else {
        "qualification fails".to_string()
    };
    Ok(ctx.report(
        "mfcq",
        vec![problem_section(pf, &x), sums, rank, dir, caveats],
        verdict,
    ))
}

fn scan_config(pf: &ProblemFile, ctx: &Context, k: Option<f64>, r: Option<f64>, grid: Option<usize>) -> Result<ScanConfig<f64>, CliError> {
    let k = match k {
        Some(k) => k,
        None => pf.check_f64("K", 2.0)?,
    };
    let r = match r {
        Some(r) => r,
        None => pf.check_f64("r", 0.1)?,
    };
    if !(k > 0.0 && r > 0.0) {
        return Err(CliError::Input(format!("K and r must be positive, got K = {k}, r = {r}")));
    }
    let mut cfg = ScanConfig::new(k, r);
    cfg.grid = match grid {
        Some(g) => g,
        None => pf.check_usize("grid", 21)?,
    };
    cfg.target_grid = pf.check_usize("target_grid", 11)?;
    cfg.search_radius = pf.check_f64("search_radius", 4.0 * r)?;
    cfg.budget = pf.check_usize("budget", cfg.budget)?;
    cfg.tol = ctx.tol;
    Ok(cfg)
}

pub fn cmd_regcheck(
    ctx: &Context,
    pf: &ProblemFile,
    k: Option<f64>,
    r: Option<f64>,
    grid: Option<usize>,
) -> Result<Report, CliError> {
    let x = pf.point_or(None)?;
    let s = pf.system()?;
    let cfg = scan_config(pf, ctx, k, r, grid)?;
    let g = verify_regularity_grid(&s, &x, &cfg).map_err(regularity_err)?;
    let mut sec = Section::new("grid");
    sec.push("K", Value::num(cfg.k))
        .push("r", Value::num(cfg.r))
        .push("grid", Value::Int(cfg.grid as u64))
        .push("target_grid", Value::Int(cfg.target_grid as u64))
        .push("samples", Value::Int(g.samples as u64))
        .push("violators", Value::Int(g.violators as u64))
        .push("empty_targets", Value::Int(g.empty_targets as u64))
        .push("resolution", Value::num(g.resolution))
        .push("worst_ratio", Value::num(g.worst_ratio));
    if let Some(w) = &g.worst {
        sec.push("worst_x", Value::vector(&w.x))
            .push("worst_y", Value::vector(&w.y))
            .push("worst_z", Value::vector(&w.z))
            .push("worst_distance", Value::num(w.distance))
            .push("worst_residual", Value::num(w.residual));
    }
    let radii = [cfg.r, cfg.r / 10.0, cfg.r / 100.0];
    let floor = pf.check_f64("floor", 1e-2)?;
    let m = margin_infima(&s, &x, &radii, 11, 5, pf.norm()?, floor).map_err(regularity_err)?;
    let mut inf = Section::new("margin infima");
    for (k, mi) in m.infima.iter().enumerate() {
        inf.push(format!("radius{}", k + 1), Value::num(mi.radius))
            .push(format!("margin{}", k + 1), Value::num(mi.margin))
            .push(format!("at{}", k + 1), Value::vector(&mi.x));
    }
    inf.push("floor", Value::num(floor))
        .push("consistent_with_non_regularity", Value::Bool(m.consistent_with_non_regularity));
    let verdict = if g.passed() {
        format!(
            "no violation of the error bound at K = {} on the sampled grid (empirical)",
            cfg.k
        )
    } else {
        format!("error bound violated at K = {} by {} samples", cfg.k, g.violators)
    };
    Ok(ctx.report("regcheck", vec![problem_section(pf, &x), sec, inf], verdict))
}

fn selection_text(pq: &ProgramQd<f64>, sel: &Selection) -> String {
    let v = |p: &Polytope<f64>, i: usize| Value::vector(&p.vertices()[i]).text();
    let mut parts = vec![format!("w0 = {}", v(pq.u.sup(), sel.w0))];
    for (j, (&a, &b)) in sel.v.iter().zip(&sel.w).enumerate() {
        parts.push(format!("v{} = {}", j + 1, v(pq.f[j].sub(), a)));
        parts.push(format!("w{} = {}", j + 1, v(pq.f[j].sup(), b)));
    }
    for &(i, k) in &sel.z {
        parts.push(format!("z{} = {}", i + 1, v(pq.g[i].sup(), k)));
    }
    parts.join("; ")
}

pub fn cmd_optcheck(ctx: &Context, pf: &ProblemFile, at: Option<&str>, cs: &[f64]) -> Result<Report, CliError> {
    let x = pf.point_or(at)?;
    let p = pf.program()?;
    let b = p.binding(&x);
    let pq = ProgramQd::at(&p, &b).map_err(input)?;
    if pq.f_values.iter().any(|v| v.abs() > ctx.tol) || pq.g_values.iter().any(|v| *v > ctx.tol) {
        return Err(CliError::Input(format!(
            "point is not feasible: f = {}, g = {}",
            Value::vector(&pq.f_values).text(),
            Value::vector(&pq.g_values).text()
        )));
    }
    let ladder = if !cs.is_empty() {
        cs.to_vec()
    } else if let Some(l) = pf.check_list("c")? {
        l
    } else {
        default_c_ladder()
    };
    if ladder.is_empty() || ladder.iter().any(|c| !(*c >= 0.0)) {
        return Err(CliError::Input("penalty weights must be nonnegative".into()));
    }
    let rep = optimality_report_with(&p, &b, &ladder, ctx.tol).map_err(input)?;
    let mut sections = vec![problem_section(pf, &x)];
    let mut data = Section::new("data");
    data.push("u sub", Value::points(pq.u.sub().vertices()))
        .push("u sup", Value::points(pq.u.sup().vertices()));
    for (j, q) in pq.f.iter().enumerate() {
        data.push(format!("f{} sub", j + 1), Value::points(q.sub().vertices()))
            .push(format!("f{} sup", j + 1), Value::points(q.sup().vertices()));
    }
    for &i in &pq.active {
        data.push(format!("g{} sub", i + 1), Value::points(pq.g[i].sub().vertices()))
            .push(format!("g{} sup", i + 1), Value::points(pq.g[i].sup().vertices()));
    }
    data.push("active_set", Value::indices(&pq.active));
    sections.push(data);
    for rung in &rep.rungs {
        let mut s = Section::new(format!("c = {}", Num(rung.c).text()));
        s.push("stationarity", Value::Bool(rung.stationarity.holds))
            .push("gap", Value::num(rung.stationarity.gap));
        if let Some(w) = &rung.stationarity.violating_w {
            s.push("violating_w", Value::vector(w));
        }
        let verdict = match rung.selections.verdict {
            SelectionVerdict::Holds => "multipliers exist for every selection",
            SelectionVerdict::Fails => "some selection has no multipliers",
            SelectionVerdict::Partial => "selection budget reached before a failure",
        };
        s.push("selections", Value::Text(verdict.into()))
            .push("checked", Value::Int(rung.selections.checked as u64))
            .push("total", Value::Int(rung.selections.total as u64));
        if let Some(sel) = &rung.selections.first_failure {
            s.push("infeasible_selection", Value::Text(selection_text(&pq, sel)));
        }
        sections.push(s);
    }
    let mut tail = Section::new("summary");
    match &rep.c_star {
        Some(c) => {
            tail.push("c_star_empirical", Value::num(c.estimate))
                .push("c_probe", Value::num(c.probe));
        }
        None => {
            tail.push("c_star_empirical", Value::Text("none (fails at the largest c)".into()));
        }
    }
    for pw in &rep.pathway {
        match pw {
            Pathway::Mfcq { holds } => {
                tail.push("pathway qualification", Value::Bool(*holds));
            }
            Pathway::ErrorBound { estimate } => {
                tail.push("pathway error_bound", Value::num(*estimate));
            }
            Pathway::None => {
                tail.push("pathway qualification", Value::Text("not applicable".into()));
            }
        }
    }
    let cfg = scan_config(pf, ctx, None, None, None)?;
    match error_bound_pathway(&p, &x, &cfg) {
        Ok(Pathway::ErrorBound { estimate }) => {
            tail.push("pathway error_bound_empirical", Value::num(estimate));
        }
        Ok(_) => {
            tail.push("pathway error_bound_empirical", Value::Text("not applicable".into()));
        }
        Err(e) => {
            tail.push("pathway error_bound_empirical", Value::Text(format!("unavailable: {e}")));
        }
    }
    tail.push("consistent", Value::Bool(rep.consistent));
    sections.push(tail);
    let verdict = match (&rep.c_star, rep.holds_somewhere()) {
        (Some(c), true) => format!(
            "conditions hold for c >= {} (necessary conditions only)",
            Num(c.estimate).text()
        ),
        (None, true) => "conditions hold on part of the ladder (necessary conditions only)".into(),
        (_, false) => "conditions fail - point not optimal".into(),
    };
    Ok(ctx.report("optcheck", sections, verdict))
}
