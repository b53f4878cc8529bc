use proptest::prelude::*;
use quasidiff::geometry::linalg::determinant;
use quasidiff::Polytope;

fn points(dim: usize, max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-3.0..3.0f64, dim), 1..=max)
}

fn poly(dim: usize, max: usize) -> impl Strategy<Value = Polytope<f64>> {
    points(dim, max).prop_map(move |p| Polytope::new(dim, p).unwrap())
}

fn direction(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, dim)
}

fn brute_support(pts: &[Vec<f64>], h: &[f64]) -> f64 {
    pts.iter()
        .map(|p| p.iter().zip(h).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn canonical_form_keeps_support(pts in points(2, 12), h in direction(2)) {
        let p = Polytope::new(2, pts.clone()).unwrap();
        prop_assert!((p.support(&h).unwrap() - brute_support(&pts, &h)).abs() < 1e-9);
    }

    #[test]
    fn minkowski_support_is_additive(a in poly(3, 6), b in poly(3, 6), h in direction(3)) {
        let s = a.minkowski_sum(&b).unwrap();
        let lhs = s.support(&h).unwrap();
        let rhs = a.support(&h).unwrap() + b.support(&h).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
    }

    #[test]
    fn hull_is_idempotent(a in poly(2, 10), b in poly(2, 10)) {
        let h = Polytope::hull_of_union(&[a.clone(), b.clone()]).unwrap();
        let hh = Polytope::hull_of_union(&[h.clone(), h.clone()]).unwrap();
        prop_assert!(h.approx_eq(&hh, 1e-12));
        let again = Polytope::new(2, h.vertices().to_vec()).unwrap();
        prop_assert_eq!(again.vertices(), h.vertices());
        prop_assert!(h.contains(&a.vertices()[0], 1e-9).unwrap());
    }

    #[test]
    fn projection_agrees_with_membership(p in poly(3, 8), q in direction(3)) {
        let q: Vec<f64> = q.iter().map(|x| 4.0 * x).collect();
        let (y, d) = p.nearest_point(&q).unwrap();
        prop_assert!(p.contains(&y, 1e-7).unwrap());
        prop_assert_eq!(p.contains(&q, 1e-9).unwrap(), d <= 1e-9);
        // Optimality: <q - y, v - y> <= 0 for every vertex v.
        for v in p.vertices() {
            let ip: f64 = (0..3).map(|i| (q[i] - y[i]) * (v[i] - y[i])).sum();
            prop_assert!(ip <= 1e-7 * (1.0 + d), "{ip}");
        }
    }

    #[test]
    fn projection_of_a_member_is_itself(p in poly(2, 8), w in prop::collection::vec(0.0..1.0f64, 8)) {
        let vs = p.vertices();
        let total: f64 = w.iter().take(vs.len()).sum::<f64>() + 1e-12;
        let x: Vec<f64> = (0..2)
            .map(|i| vs.iter().zip(&w).map(|(v, a)| v[i] * a).sum::<f64>() / total)
            .collect();
        prop_assert!(p.distance_to(&x).unwrap() < 1e-8);
    }

    #[test]
    fn negate_and_scale(p in poly(2, 8), t in -3.0..3.0f64, h in direction(2)) {
        let s = p.scale(t).support(&h).unwrap();
        let expect = if t >= 0.0 {
            t * p.support(&h).unwrap()
        } else {
            -t * p.negate().support(&h).unwrap()
        };
        prop_assert!((s - expect).abs() < 1e-9);
    }
}

#[test]
fn determinant_matches_nalgebra() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for n in 1..=5 {
        for _ in 0..50 {
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect();
            let m = nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]);
            assert!((determinant(&rows) - m.determinant()).abs() < 1e-9);
        }
    }
}

#[test]
fn single_precision_polytopes() {
    let p = Polytope::<f32>::new(2, vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]]).unwrap();
    assert_eq!(p.num_vertices(), 2);
    let (_, d) = p.nearest_point(&[0.0, 0.0]).unwrap();
    assert!((d - std::f32::consts::FRAC_1_SQRT_2).abs() < 1e-5);
}
