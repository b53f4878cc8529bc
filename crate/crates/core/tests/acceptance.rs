//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Exits 0 after printing so the remaining suites still run under
//! `cargo test`; set `ACCEPTANCE_STRICT=1` to exit 1 when any line is FAIL.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::time::Instant;

use quasidiff::cq::{find_hbar, locate_flip, qd_mfcq};
use quasidiff::geometry::linalg::determinant;
use quasidiff::optimality::{
    all_selections_of, check_multipliers, check_stationarity, default_c_ladder, ProgramQd,
    Selection, SelectionVerdict, SELECTION_BUDGET,
};
use quasidiff::qd::{qd_plus_set, steepest_rate};
use quasidiff::regularity::scan::{ratio_profile, ScanConfig};
use quasidiff::regularity::{check_condition4, psi_expr, uderzo_condition, Norm};
use quasidiff::{Expr, Polytope, ProgramSpec, SystemSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;

struct Line {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: Vec<String>,
}

fn origin_margins(rng: &mut ChaCha8Rng) -> (bool, f64, Vec<String>) {
    let s = SystemSpec::<f64>::parse(2, &["abs(x1) - abs(x2)"], &[]).unwrap();
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut min_margin = f64::INFINITY;
    let mut counts = [0usize; 4];
    for k in 0..100 {
        let case = k % 4;
        let nz = |rng: &mut ChaCha8Rng| {
            let v: f64 = rng.gen_range(0.01..0.1);
            if rng.gen() { v } else { -v }
        };
        let any = |rng: &mut ChaCha8Rng| if rng.gen_range(0..3) == 0 { 0.0 } else { nz(rng) };
        // (y above F, x2 != 0), (above, x2 = 0), (below, x1 != 0), (below, x1 = 0)
        let x = match case {
            0 => [any(rng), nz(rng)],
            1 => [any(rng), 0.0],
            2 => [nz(rng), any(rng)],
            _ => [0.0, any(rng)],
        };
        let f = x[0].abs() - x[1].abs();
        let delta: f64 = rng.gen_range(0.001..0.05);
        let y = if case < 2 { f + delta } else { f - delta };
        let expect = if case % 2 == 0 { SQRT_2 } else { 1.0 };
        let q = psi_expr(&s, &[y], &[], Norm::L1).unwrap().qd_at(&x).unwrap();
        let c4 = check_condition4(&q, 1.0);
        worst = worst.max((c4.margin - expect).abs());
        min_margin = min_margin.min(c4.margin);
        ok &= (c4.margin - expect).abs() <= 1e-9;
        for k in [1.0 + 1e-6, 1.5, 10.0] {
            ok &= check_condition4(&q, k).holds;
        }
        counts[case] += 1;
    }
    let detail = vec![
        format!("samples per case {counts:?}, max |margin - expected| = {worst:.3e}"),
        format!("condition holds at K = 1 + 1e-6, 1.5, 10 for every sample"),
    ];
    (ok, min_margin, detail)
}

fn criterion_1(rng: &mut ChaCha8Rng) -> (Line, f64) {
    let t = Instant::now();
    let (ok, min_margin, mut detail) = origin_margins(rng);
    let secs = t.elapsed().as_secs_f64();
    detail.push(format!("runtime {secs:.3} s (limit 1 s)"));
    (
        Line {
            id: 1,
            title: "|x1|-|x2| margins sqrt(2) / 1 in the four sign cases",
            pass: ok && secs < 1.0,
            detail,
        },
        min_margin,
    )
}

fn criterion_2() -> Line {
    let s = SystemSpec::<f64>::parse(2, &["abs(x1) - abs(x2)"], &[]).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for y in [0.05, 0.5] {
        let q = psi_expr(&s, &[y], &[], Norm::L1).unwrap().qd_at(&[0.0, 0.0]).unwrap();
        let zero_in_sup = q.sup().contains(&[0.0, 0.0], 1e-12).unwrap();
        let zero_in_sub = q.sub().contains(&[0.0, 0.0], 1e-12).unwrap();
        let (_, d) = uderzo_condition(&q, 0.0);
        let c4 = check_condition4(&q, 1.5);
        ok &= zero_in_sup && zero_in_sub && d <= 1e-12 && c4.holds && (c4.margin - 1.0).abs() < 1e-9;
        detail.push(format!(
            "y = {y}: qd = {q}; w = 0 in sup: {zero_in_sup}, 0 in sub + 0: {zero_in_sub}, inf_w d(0, sub + w) = {d:.1e}; steepest margin {:.6} (holds at K = 1.5: {})",
            c4.margin, c4.holds
        ));
    }
    Line {
        id: 2,
        title: "all-w comparator fails at x = 0, y > 0 while the steepest-rate condition holds",
        pass: ok,
        detail,
    }
}

fn criterion_3() -> Line {
    let t = Instant::now();
    let s = SystemSpec::<f64>::parse(1, &["min(x1, max(pow(x1, 3), 0))"], &[]).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for x in [0.05, 0.1, 0.2] {
        let psi = psi_expr(&s, &[0.0], &[], Norm::L1).unwrap();
        let q = psi.qd_at(&[x]).unwrap();
        let m = check_condition4(&q, 1.0).margin;
        let err = (m - 3.0 * x * x).abs();
        ok &= err <= 1e-9;
        detail.push(format!("x = {x}: qd {q}, margin {m:.12} vs 3x^2 = {:.12}", 3.0 * x * x));
    }
    let ys: Vec<f64> = (0..=8).map(|k| 10f64.powf(-2.0 - k as f64 / 4.0)).collect();
    let targets: Vec<(Vec<f64>, Vec<f64>)> = ys.iter().map(|y| (vec![*y], vec![])).collect();
    let mut cfg = ScanConfig::new(1.0, 0.01);
    cfg.search_radius = 0.5;
    let prof = ratio_profile(&s, &[0.0], &targets, &cfg).unwrap();
    let ratios: Vec<f64> = prof.iter().map(|r| r.ratio).collect();
    let monotone = ratios.windows(2).all(|w| w[1] > w[0]);
    let growth = ratios[ratios.len() - 1] / ratios[0];
    let rel = prof
        .iter()
        .map(|r| (r.ratio / r.y[0].powf(-2.0 / 3.0) - 1.0).abs())
        .fold(0.0, f64::max);
    ok &= monotone && growth >= 10.0;
    let secs = t.elapsed().as_secs_f64();
    ok &= secs < 10.0;
    detail.push(format!(
        "ratio d(0, S(y)) / |y| at y = 1e-2 .. 1e-4: {:.3} .. {:.3}, monotone {monotone}, growth {growth:.2}x, max relative deviation from y^(-2/3) {rel:.2e}",
        ratios[0],
        ratios[ratios.len() - 1]
    ));
    detail.push(format!("runtime {secs:.3} s (limit 10 s)"));
    Line {
        id: 3,
        title: "cubic: margins 3x^2 and ratio growth like y^(-2/3)",
        pass: ok,
        detail,
    }
}

fn sin_system(p: f64) -> SystemSpec<f64> {
    SystemSpec::parse(
        2,
        &["max(2*x1, x1) - abs(sin(p*x2))", "min(x2, 2*x2) + sin(p*(x1 + x2))"],
        &[],
    )
    .unwrap()
    .with_param("p", p)
}

fn sin_verdict(p: f64) -> bool {
    let s = sin_system(p);
    qd_mfcq(&s, &s.binding(&[0.0, 0.0])).unwrap().verdict
}

/// Vertex extremes of co{1,4} + co{p,2p} + co{-p^2,p^2}.
fn interval_bound(p: f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for a in [1.0, 4.0] {
        for b in [p, 2.0 * p] {
            for c in [-p * p, p * p] {
                lo = lo.min(a + b + c);
                hi = hi.max(a + b + c);
            }
        }
    }
    (lo, hi)
}

fn criterion_4() -> Line {
    let mut detail = Vec::new();
    let lower_target = 1.0 - SQRT_2;
    let upper_target = (1.0 + 5f64.sqrt()) / 2.0;
    let lower = locate_flip(sin_verdict, -1.0, 0.0, 1e-8).unwrap_or(f64::NAN);
    let upper = locate_flip(sin_verdict, 1.0, 2.0, 1e-8).unwrap_or(f64::NAN);
    let lower_ok = (lower - lower_target).abs() <= 1e-6;
    let upper_ok = (upper - upper_target).abs() <= 1e-6;
    detail.push(format!(
        "upper flip {upper:.9} vs (1+sqrt5)/2 = {upper_target:.9}: {}",
        if upper_ok { "ok" } else { "MISMATCH" }
    ));
    detail.push(format!(
        "lower flip {lower:.9} vs 1-sqrt2 = {lower_target:.9}: {}",
        if lower_ok { "ok" } else { "MISMATCH" }
    ));
    let bound_flip = locate_flip(|p| interval_bound(p).0 > 0.0, -1.0, 0.0, 1e-8).unwrap_or(f64::NAN);
    detail.push(format!(
        "note: the interval bound co{{1,4}} + co{{p,2p}} + co{{-p^2,p^2}} flips at {bound_flip:.9}; exact vertex enumeration of det(t, ps; p, p+r) = t(p+r) - p^2 s has minimum 1 + p - p^2 on (-1, 0), zero at (1-sqrt5)/2 = {:.9}",
        (1.0 - 5f64.sqrt()) / 2.0
    ));
    let p = -0.5;
    let s = sin_system(p);
    let r = qd_mfcq(&s, &s.binding(&[0.0, 0.0])).unwrap();
    let (dmin, _) = r.det_range().unwrap();
    let witness = [vec![1.0, p], vec![p, p + 1.0]];
    detail.push(format!(
        "note: at p = -0.5 exact det range min = {dmin:.6} (attained by [[1, {:.2}], [{p}, {:.2}]], det {:.6}) while the interval bound gives {:.6}",
        witness[0][1],
        witness[1][1],
        determinant(&witness),
        interval_bound(p).0
    ));

    let s = sin_system(1.0);
    let r = qd_mfcq(&s, &s.binding(&[0.0, 0.0])).unwrap();
    let (dmin, dmax) = r.det_range().unwrap();
    let (bmin, bmax) = interval_bound(1.0);
    let range_ok = (dmin - bmin).abs() <= 1e-12 && (dmax - bmax).abs() <= 1e-12 && r.verdict;
    detail.push(format!(
        "p = 1: det range [{dmin}, {dmax}] vs enumerated bound [{bmin}, {bmax}]: {}",
        if range_ok { "ok" } else { "MISMATCH" }
    ));
    let plus = quasidiff::expr::qd_matrix_at(&s.equalities, &s.binding(&[0.0, 0.0]))
        .unwrap()
        .plus_rows();
    let m = [vec![1.0, -1.0], vec![1.0, 2.0]];
    let member = plus[0].contains(&m[0], 1e-12).unwrap() && plus[1].contains(&m[1], 1e-12).unwrap();
    let d = determinant(&m);
    let member_ok = member && (d - 3.0).abs() <= 1e-12;
    detail.push(format!(
        "member [[1,-1],[1,2]] in the sum: {member}, det {d} vs p^2 + p + 1 = 3: {}",
        if member_ok { "ok" } else { "MISMATCH" }
    ));
    Line {
        id: 4,
        title: "sin-system verdict flips at 1-sqrt2 and (1+sqrt5)/2; det range at p = 1",
        pass: lower_ok && upper_ok && range_ok && member_ok,
        detail,
    }
}

fn criterion_5(min_margin: f64) -> Line {
    let s = SystemSpec::<f64>::parse(2, &["abs(x1) - abs(x2)"], &[]).unwrap();
    let b = s.binding(&[0.0, 0.0]);
    let r = qd_mfcq(&s, &b).unwrap();
    let plus = qd_plus_set(&s.equalities[0].qd_at(&b).unwrap());
    let boxed = Polytope::cuboid(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
    let is_box = plus.approx_eq(&boxed, 1e-12);
    Line {
        id: 5,
        title: "|x1|-|x2|: qualification fails although the margins stay positive",
        pass: !r.verdict && is_box && min_margin > 0.0,
        detail: vec![format!(
            "sum = {plus} (unit box: {is_box}), verdict {}, smallest margin from criterion 1 = {min_margin:.6}",
            r.verdict
        )],
    }
}

fn criterion_6(rng: &mut ChaCha8Rng) -> Line {
    let s = SystemSpec::<f64>::parse(2, &["abs(x1) - x2"], &["x1"]).unwrap();
    let b = s.binding(&[0.0, 0.0]);
    let r = qd_mfcq(&s, &b).unwrap();
    let eq = vec![qd_plus_set(&s.equalities[0].qd_at(&b).unwrap())];
    let ineq = vec![qd_plus_set(&s.inequalities[0].qd_at(&b).unwrap())];
    let h = find_hbar(2, &eq, &ineq).unwrap();
    let hbar_fails = h.span_rank == 2 && h.hbar.is_none() && !r.verdict;
    let mut min_all = f64::INFINITY;
    let mut min_on = f64::INFINITY;
    let mut on_count = 0;
    for k in 0..200 {
        let mut x: [f64; 2] = [rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)];
        if k % 10 == 0 {
            x[0] = 0.0;
        }
        let f = x[0].abs() - x[1];
        let (y, z) = match k % 3 {
            0 => {
                on_count += 1;
                (f, x[0] - rng.gen_range(0.001..0.1))
            }
            1 => (f + rng.gen_range(0.001..0.1), rng.gen_range(-0.2..0.2)),
            _ => (f - rng.gen_range(0.001..0.1), rng.gen_range(-0.2..0.2)),
        };
        let q = psi_expr(&s, &[y], &[z], Norm::L1).unwrap().qd_at(&x).unwrap();
        let (m, _) = steepest_rate(&q);
        min_all = min_all.min(m);
        if k % 3 == 0 {
            min_on = min_on.min(m);
        }
    }
    let bound_ok = min_all >= FRAC_1_SQRT_2 - 1e-9;
    let attained = (min_on - FRAC_1_SQRT_2).abs() <= 1e-9;
    Line {
        id: 6,
        title: "|x1|-x2 / x1 system: equality span is R^2, margins >= sqrt(2)/2",
        pass: hbar_fails && bound_ok && attained,
        detail: vec![
            format!(
                "span rank {}, hbar {:?}, margin {}, verdict {}",
                h.span_rank, h.hbar, h.margin, r.verdict
            ),
            format!(
                "200 samples off the graph: min margin {min_all:.12}; on y = f(x), x1 > z ({on_count} samples): min {min_on:.12} vs sqrt(2)/2 = {FRAC_1_SQRT_2:.12}"
            ),
        ],
    }
}

fn criterion_7() -> Line {
    let p = ProgramSpec::<f64>::parse(2, "-x1 + x2", &["abs(x1) - abs(x2)"], &[]).unwrap();
    let b = p.binding(&[0.0, 0.0]);
    let pq = ProgramQd::at(&p, &b).unwrap();
    let find = |vs: &[Vec<f64>], x: [f64; 2]| vs.iter().position(|v| v[..] == x[..]);
    let mut detail = Vec::new();
    let sel = match (find(pq.f[0].sub().vertices(), [1.0, 0.0]), find(pq.f[0].sup().vertices(), [0.0, 1.0])) {
        (Some(v), Some(w)) => Some(Selection { w0: 0, v: vec![v], w: vec![w], z: vec![] }),
        _ => None,
    };
    let infeasible = sel
        .as_ref()
        .is_some_and(|s| !check_multipliers(&p, &b, s, None).unwrap().is_feasible());
    detail.push(format!("selection v = (1,0), w = (0,1): multipliers infeasible = {infeasible}"));
    let ladder = default_c_ladder::<f64>();
    let fails: Vec<bool> = ladder
        .iter()
        .map(|c| !check_stationarity(&p, &b, *c).unwrap().holds)
        .collect();
    let all_fail = fails.iter().all(|f| *f);
    detail.push(format!("stationarity fails on ladder {ladder:?}: {fails:?}"));
    let mut agree = 0;
    let mut total = 0;
    let mut holds = 0;
    for prog in common::programs() {
        let b = prog.binding(&[0.0, 0.0]);
        let pq = ProgramQd::at(&prog, &b).unwrap();
        for c in [0.1, 1.0, 10.0] {
            let st = check_stationarity(&prog, &b, c).unwrap().holds;
            let all = all_selections_of(&pq, Some(c), SELECTION_BUDGET).unwrap().verdict;
            total += 1;
            holds += usize::from(st);
            agree += usize::from(all != SelectionVerdict::Partial && st == (all == SelectionVerdict::Holds));
        }
    }
    detail.push(format!(
        "stationarity <=> all selections: {agree}/{total} agree ({holds} hold, {} fail) on the example plus 22 fixtures (20 random DC) at c = 0.1, 1, 10",
        total - holds
    ));
    Line {
        id: 7,
        title: "penalty example: multipliers infeasible, stationarity fails, equivalence cross-check",
        pass: infeasible && all_fail && agree == total,
        detail,
    }
}

fn criterion_8(rng: &mut ChaCha8Rng) -> Line {
    let t = Instant::now();
    let mut detail = Vec::new();
    // (a) finite differences
    let mut worst_fd: f64 = 0.0;
    for fx in common::FIXTURES {
        let e = Expr::<f64>::parse(fx.text, fx.n).unwrap();
        for _ in 0..100 {
            let x = common::random_point(rng, fx.n);
            let h = common::random_dir(rng, fx.n);
            let b = common::binding(x.clone());
            let dd = e.qd_at(&b).unwrap().dd(&h).unwrap();
            let tt = 1e-7;
            let xt: Vec<f64> = x.iter().zip(&h).map(|(a, d)| a + tt * d).collect();
            let fd = (e.eval(&common::binding(xt)).unwrap() - e.eval(&b).unwrap()) / tt;
            worst_fd = worst_fd.max((dd - fd).abs());
        }
    }
    let a = worst_fd < 1e-4;
    detail.push(format!("(a) {} fixtures x 100 pairs: max |dd - fd| = {worst_fd:.2e} (tol 1e-4)", common::FIXTURES.len()));
    // (b) equivalence shifts
    let mut worst_shift: f64 = 0.0;
    for fx in common::FIXTURES {
        let e = Expr::<f64>::parse(fx.text, fx.n).unwrap();
        let q = e.qd_at(&common::binding(common::random_point(rng, fx.n))).unwrap();
        for _ in 0..50 {
            let c = common::random_polytope(rng, fx.n);
            let sq = q.shifted(&c).unwrap();
            let h = common::random_dir(rng, fx.n);
            worst_shift = worst_shift.max((sq.dd(&h).unwrap() - q.dd(&h).unwrap()).abs());
        }
    }
    let b = worst_shift <= 1e-10;
    detail.push(format!("(b) 50 shifts per fixture: max dd change {worst_shift:.2e} (tol 1e-10)"));
    // (c) steepest rate
    let mut worst_rate: f64 = 0.0;
    for _ in 0..20 {
        let q = common::random_qd(rng, 2);
        let (r, _) = steepest_rate(&q);
        worst_rate = worst_rate.max((r - common::sampled_rate(&q, 40_000)).abs());
    }
    let c = worst_rate <= 1e-6;
    detail.push(format!("(c) 20 random pairs: max |vertex rate - sampled| = {worst_rate:.2e} (tol 1e-6)"));
    // (d) det range
    let rows: Vec<Polytope<f64>> = (0..3).map(|_| common::random_polytope(rng, 3)).collect();
    let dr = quasidiff::cq::full_rank_det_range(&rows).unwrap();
    let mut outside: f64 = 0.0;
    for _ in 0..100_000 {
        let m: Vec<Vec<f64>> = rows
            .iter()
            .map(|p| {
                let w: Vec<f64> = p.vertices().iter().map(|_| rng.gen::<f64>()).collect();
                let s: f64 = w.iter().sum();
                (0..3)
                    .map(|i| p.vertices().iter().zip(&w).map(|(v, a)| v[i] * a).sum::<f64>() / s)
                    .collect()
            })
            .collect();
        let d = determinant(&m);
        outside = outside.max(dr.min - d).max(d - dr.max);
    }
    let d = outside <= 1e-9;
    detail.push(format!(
        "(d) det range [{:.4}, {:.4}] over {} vertex tuples; 1e5 random selections exceed it by at most {:.2e}",
        dr.min, dr.max, dr.tuples, outside.max(0.0)
    ));
    // (e) geometry
    let mut worst_geo: f64 = 0.0;
    let mut member_ok = true;
    for _ in 0..200 {
        let p = common::random_polytope(rng, 3);
        let q = common::random_polytope(rng, 3);
        let h = common::random_dir(rng, 3);
        let s = p.minkowski_sum(&q).unwrap();
        worst_geo = worst_geo.max((s.support(&h).unwrap() - p.support(&h).unwrap() - q.support(&h).unwrap()).abs());
        let hull = Polytope::hull_of_union(&[p.clone(), q.clone()]).unwrap();
        member_ok &= Polytope::hull_of_union(&[hull.clone(), hull.clone()]).unwrap().approx_eq(&hull, 1e-12);
        let x: Vec<f64> = h.iter().map(|a| 3.0 * a).collect();
        let (y, dist) = p.nearest_point(&x).unwrap();
        member_ok &= p.contains(&y, 1e-7).unwrap() && p.contains(&x, 1e-9).unwrap() == (dist <= 1e-9);
    }
    let e = worst_geo <= 1e-9 && member_ok;
    detail.push(format!(
        "(e) 200 trials: support additivity error {worst_geo:.2e}, hull idempotence and projection/membership consistent: {member_ok}"
    ));
    let secs = t.elapsed().as_secs_f64();
    detail.push(format!("runtime {secs:.2} s (full property suites run as separate targets)"));
    Line {
        id: 8,
        title: "property checks (a)-(e)",
        pass: a && b && c && d && e && secs < 60.0,
        detail,
    }
}

fn main() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (l1, min_margin) = criterion_1(&mut rng);
    let lines = vec![
        l1,
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(min_margin),
        criterion_6(&mut rng),
        criterion_7(),
        criterion_8(&mut rng),
    ];
    println!("acceptance (seed 0)");
    for l in &lines {
        println!("criterion {} {}: {}", l.id, if l.pass { "PASS" } else { "FAIL" }, l.title);
        for d in &l.detail {
            println!("    {d}");
        }
    }
    let failed: Vec<u32> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    println!(
        "acceptance summary: {}/{} PASS{} ({:.2} s)",
        lines.len() - failed.len(),
        lines.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(", FAIL: {failed:?}")
        },
        start.elapsed().as_secs_f64()
    );
    if !failed.is_empty() && std::env::var_os("ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
        std::process::exit(1);
    }
}
