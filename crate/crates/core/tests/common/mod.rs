//! Fixtures shared by the integration suites and the acceptance report.
#![allow(dead_code)]

use quasidiff::{Binding, Polytope, ProgramSpec, Quasidifferential};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Fixture {
    pub name: &'static str,
    pub text: &'static str,
    pub n: usize,
}

pub const FIXTURES: &[Fixture] = &[
    Fixture { name: "abs difference", text: "abs(x1) - abs(x2)", n: 2 },
    Fixture { name: "sin f1", text: "max(2*x1, x1) - abs(sin(p*x2))", n: 2 },
    Fixture { name: "sin f2", text: "min(x2, 2*x2) + sin(p*(x1 + x2))", n: 2 },
    Fixture { name: "cubic", text: "min(x1, max(pow(x1, 3), 0))", n: 1 },
    Fixture { name: "cubic distance", text: "abs(0.001 - min(x1, max(pow(x1, 3), 0)))", n: 1 },
    Fixture { name: "abs minus linear", text: "abs(0.1 - (abs(x1) - x2)) + max(x1 - 0.05, 0)", n: 2 },
    Fixture { name: "penalty", text: "-x1 + x2 + 3*abs(abs(x1) - abs(x2))", n: 2 },
    Fixture { name: "product", text: "abs(x1)*max(x2, x3) - min(x1*x2, exp(x3) - 1)", n: 3 },
    Fixture { name: "nested", text: "max(abs(x1 - x2), min(x1, -x2), cos(x1)*x2) - abs(abs(x1) - 0.5*abs(x2))", n: 2 },
    Fixture { name: "scaled", text: "-2*max(x1, x2, 0) + abs(3*x1 - x2)*sin(x2)", n: 2 },
];

pub fn binding(x: Vec<f64>) -> Binding<f64> {
    Binding::new(x).with_param("p", 1.0)
}

/// Points near the kink loci: coordinates are zero or small with
/// probability one half each.
pub fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| match rng.gen_range(0..4) {
            0 => 0.0,
            1 => rng.gen_range(-0.5..0.5),
            _ => rng.gen_range(-1.2..1.2),
        })
        .collect()
}

pub fn random_dir(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let h: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let nh = h.iter().map(|a| a * a).sum::<f64>().sqrt();
        if nh > 0.1 {
            return h.iter().map(|a| a / nh).collect();
        }
    }
}

pub fn random_polytope(rng: &mut ChaCha8Rng, n: usize) -> Polytope<f64> {
    let k = rng.gen_range(1..6);
    let pts = (0..k)
        .map(|_| (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    Polytope::new(n, pts).unwrap()
}

pub fn random_qd(rng: &mut ChaCha8Rng, n: usize) -> Quasidifferential<f64> {
    Quasidifferential::new(random_polytope(rng, n), random_polytope(rng, n)).unwrap()
}

/// `max(0, -min_{|h| <= 1} dd(h))` over a fine circle, refined around the
/// coarse near-maximizers since the sampled function has kinks.
pub fn sampled_rate(q: &Quasidifferential<f64>, k: usize) -> f64 {
    let at = |a: f64| -q.dd(&[a.cos(), a.sin()]).unwrap();
    let step = std::f64::consts::TAU / k as f64;
    let coarse: Vec<f64> = (0..k).map(|i| at(step * i as f64)).collect();
    let top = coarse.iter().copied().fold(0.0, f64::max);
    let mut best = top;
    for (i, v) in coarse.iter().enumerate() {
        if *v >= top - 1e-3 {
            let a0 = step * (i as f64 - 1.0);
            for j in 0..=2000 {
                best = best.max(at(a0 + 2.0 * step * j as f64 / 2000.0));
            }
        }
    }
    best
}

fn lin(rng: &mut ChaCha8Rng) -> String {
    let a: i32 = rng.gen_range(-2..=2);
    let b: i32 = rng.gen_range(-2..=2);
    format!("{a}*x1 + {b}*x2")
}

/// Difference of two pointwise maxima of linear forms; zero at the origin.
fn dc(rng: &mut ChaCha8Rng) -> String {
    let k1 = rng.gen_range(1..=2);
    let k2 = rng.gen_range(1..=2);
    let piece = |rng: &mut ChaCha8Rng, k: usize| {
        if k == 1 {
            lin(rng)
        } else {
            format!("max({}, {})", lin(rng), lin(rng))
        }
    };
    format!("{} - {}", piece(rng, k1), piece(rng, k2))
}

pub fn random_program(rng: &mut ChaCha8Rng) -> ProgramSpec<f64> {
    let u = dc(rng);
    let l = rng.gen_range(0..=1);
    let m = rng.gen_range(0..=2);
    let eq: Vec<String> = (0..l).map(|_| dc(rng)).collect();
    let ineq: Vec<String> = (0..m).map(|_| dc(rng)).collect();
    let eq: Vec<&str> = eq.iter().map(String::as_str).collect();
    let ineq: Vec<&str> = ineq.iter().map(String::as_str).collect();
    ProgramSpec::parse(2, &u, &eq, &ineq).unwrap()
}

/// The example problem, two hand-made fixtures and 20 random DC programs.
pub fn programs() -> Vec<ProgramSpec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut out = vec![
        ProgramSpec::parse(2, "-x1 + x2", &["abs(x1) - abs(x2)"], &[]).unwrap(),
        ProgramSpec::parse(2, "x1*x1 + x2*x2", &[], &["x1 + x2"]).unwrap(),
        ProgramSpec::parse(2, "abs(x1) - abs(x2)", &[], &["-x1"]).unwrap(),
    ];
    out.extend((0..20).map(|_| random_program(&mut rng)));
    out
}

