//! Wolfe's minimum-norm-point method over a finite point set.

use super::linalg::solve;
use crate::scalar::{dot, Scalar};

/// Minimum-norm point of `co(points)`. Returns the point and its convex
/// weights (one per input point, zero for points not in the final corral).
pub(crate) fn min_norm_point<T: Scalar>(points: &[Vec<T>]) -> (Vec<T>, Vec<T>) {
    let dim = points[0].len();
    let scale = points
        .iter()
        .map(|p| dot(p, p))
        .fold(T::zero(), T::max)
        .max(T::epsilon());
    let z1 = T::lit(1e-13);
    let z2 = T::lit(1e-12);

    let start = (0..points.len())
        .min_by(|&a, &b| {
            dot(&points[a], &points[a])
                .partial_cmp(&dot(&points[b], &points[b]))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(0);
    let mut corral: Vec<usize> = vec![start];
    let mut weights: Vec<T> = vec![T::one()];
    let mut x = points[start].clone();

    let max_major = 100 + 10 * points.len();
    for _ in 0..max_major {
        let xx = dot(&x, &x);
        if xx <= scale * T::epsilon() * T::epsilon() {
            break;
        }
        // Entering point minimizing <x, p>.
        let (j, best) = (0..points.len())
            .map(|j| (j, dot(&x, &points[j])))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
            .expect("nonempty");
        if best >= xx - z1 * scale || corral.contains(&j) {
            break;
        }
        if corral.len() > dim {
            // Corral is affinely dependent; the current point is optimal up to rounding.
            break;
        }
        corral.push(j);
        weights.push(T::zero());

        // Minor cycle.
        let mut guard = 0;
        loop {
            guard += 1;
            let Some(alpha) = affine_min_norm(points, &corral) else {
                corral.pop();
                weights.pop();
                return finish(points, &corral, &weights, dim);
            };
            if alpha.iter().all(|a| *a > z2) {
                weights = alpha;
                x = combine(points, &corral, &weights, dim);
                break;
            }
            let mut theta = T::one();
            for (w, a) in weights.iter().zip(&alpha) {
                if *a <= z2 {
                    let denom = *w - *a;
                    if denom > T::zero() {
                        theta = theta.min(*w / denom);
                    }
                }
            }
            for (w, a) in weights.iter_mut().zip(&alpha) {
                *w = theta * *a + (T::one() - theta) * *w;
            }
            let mut k = 0;
            while k < corral.len() {
                if weights[k] <= z2 {
                    corral.remove(k);
                    weights.remove(k);
                } else {
                    k += 1;
                }
            }
            let total: T = weights.iter().copied().sum();
            for w in weights.iter_mut() {
                *w /= total;
            }
            x = combine(points, &corral, &weights, dim);
            if corral.len() <= 1 || guard > 4 * points.len() + 8 {
                break;
            }
        }
    }
    finish(points, &corral, &weights, dim)
}

fn finish<T: Scalar>(
    points: &[Vec<T>],
    corral: &[usize],
    weights: &[T],
    dim: usize,
) -> (Vec<T>, Vec<T>) {
    let x = combine(points, corral, weights, dim);
    let mut full = vec![T::zero(); points.len()];
    for (i, w) in corral.iter().zip(weights) {
        full[*i] = *w;
    }
    (x, full)
}

fn combine<T: Scalar>(points: &[Vec<T>], corral: &[usize], weights: &[T], dim: usize) -> Vec<T> {
    let mut x = vec![T::zero(); dim];
    for (i, w) in corral.iter().zip(weights) {
        for (xi, pi) in x.iter_mut().zip(&points[*i]) {
            *xi += *w * *pi;
        }
    }
    x
}

/// Affine weights of the minimum-norm point of `aff(points[corral])`.
fn affine_min_norm<T: Scalar>(points: &[Vec<T>], corral: &[usize]) -> Option<Vec<T>> {
    let k = corral.len();
    if k == 1 {
        return Some(vec![T::one()]);
    }
    // [ G  1 ] [a]   [0]
    // [ 1' 0 ] [m] = [1]
    let mut m = vec![vec![T::zero(); k + 1]; k + 1];
    for (a, &i) in corral.iter().enumerate() {
        for (b, &j) in corral.iter().enumerate() {
            m[a][b] = dot(&points[i], &points[j]);
        }
        m[a][k] = T::one();
        m[k][a] = T::one();
    }
    let mut rhs = vec![T::zero(); k + 1];
    rhs[k] = T::one();
    let sol = solve(&m, &rhs)?;
    Some(sol[..k].to_vec())
}
