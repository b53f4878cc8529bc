//! Small dense linear algebra: elimination, determinants, orthonormal spans.

use crate::scalar::{dot, max_abs, Scalar};

/// Determinant of a square row-major matrix by Gaussian elimination with
/// partial pivoting.
pub fn determinant<T: Scalar>(rows: &[Vec<T>]) -> T {
    let n = rows.len();
    let mut a: Vec<Vec<T>> = rows.to_vec();
    let mut det = T::one();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if a[pivot][col] == T::zero() {
            return T::zero();
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for r in col + 1..n {
            let factor = a[r][col] / p;
            if factor != T::zero() {
                for c in col..n {
                    let v = a[col][c];
                    a[r][c] -= factor * v;
                }
            }
        }
    }
    det
}

/// Solves `m x = rhs` for square `m`; `None` when the matrix is numerically singular.
pub fn solve<T: Scalar>(m: &[Vec<T>], rhs: &[T]) -> Option<Vec<T>> {
    let n = m.len();
    let mut a: Vec<Vec<T>> = m
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(*b);
            r
        })
        .collect();
    let scale = m.iter().fold(T::zero(), |s, r| s.max(max_abs(r)));
    let eps = T::epsilon() * T::lit(64.0) * scale.max(T::one()) * T::from_usize(n.max(1)).unwrap();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].abs() <= eps {
            return None;
        }
        a.swap(pivot, col);
        let p = a[col][col];
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r][col] / p;
            if factor != T::zero() {
                for c in col..=n {
                    let v = a[col][c];
                    a[r][c] -= factor * v;
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

/// Orthonormal basis of the span of `points` (modified Gram-Schmidt with one
/// re-orthogonalization pass). A residual counts as new direction when its
/// norm exceeds `rel_tol` times the largest input norm.
pub fn orthonormal_span<T: Scalar>(points: &[Vec<T>], rel_tol: T) -> Vec<Vec<T>> {
    let scale = points
        .iter()
        .map(|p| dot(p, p).sqrt())
        .fold(T::zero(), T::max);
    if scale == T::zero() {
        return Vec::new();
    }
    let threshold = rel_tol * scale;
    let mut basis: Vec<Vec<T>> = Vec::new();
    for p in points {
        let mut r = p.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&r, b);
                for (ri, bi) in r.iter_mut().zip(b) {
                    *ri -= c * *bi;
                }
            }
        }
        let nr = dot(&r, &r).sqrt();
        if nr > threshold {
            basis.push(r.into_iter().map(|x| x / nr).collect());
        }
    }
    basis
}

/// Completes an orthonormal family in `R^dim` with standard basis vectors and
/// returns only the added complement vectors.
pub fn orthogonal_complement<T: Scalar>(basis: &[Vec<T>], dim: usize) -> Vec<Vec<T>> {
    let mut all: Vec<Vec<T>> = basis.to_vec();
    let mut added = Vec::new();
    for k in 0..dim {
        if all.len() == dim {
            break;
        }
        let mut r = vec![T::zero(); dim];
        r[k] = T::one();
        for _ in 0..2 {
            for b in &all {
                let c = dot(&r, b);
                for (ri, bi) in r.iter_mut().zip(b) {
                    *ri -= c * *bi;
                }
            }
        }
        let nr = dot(&r, &r).sqrt();
        if nr > T::lit(1e-6) {
            let v: Vec<T> = r.into_iter().map(|x| x / nr).collect();
            all.push(v.clone());
            added.push(v);
        }
    }
    added
}
