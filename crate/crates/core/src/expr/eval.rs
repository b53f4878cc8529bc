use super::{Binding, Expr, ExprError};
use crate::qd::{
    qd_abs, qd_add, qd_max, qd_min, qd_mul, qd_scale, MatrixQuasidifferential, Quasidifferential,
};
use crate::scalar::Scalar;

pub(super) fn eval<T: Scalar>(e: &Expr<T>, b: &Binding<T>) -> Result<T, ExprError> {
    Ok(match e {
        Expr::Var(i) => *b.point.get(*i).ok_or(ExprError::PointDimension {
            index: i + 1,
            len: b.point.len(),
        })?,
        Expr::Param(p) => *b
            .params
            .get(p)
            .ok_or_else(|| ExprError::UnboundParam(p.clone()))?,
        Expr::Const(c) => *c,
        Expr::Neg(a) => -eval(a, b)?,
        Expr::Add(x, y) => eval(x, b)? + eval(y, b)?,
        Expr::Sub(x, y) => eval(x, b)? - eval(y, b)?,
        Expr::Mul(x, y) => eval(x, b)? * eval(y, b)?,
        Expr::Smooth(f, a) => f.apply(eval(a, b)?),
        Expr::Abs(a) => eval(a, b)?.abs(),
        Expr::Max(xs) => {
            let mut m = T::neg_infinity();
            for x in xs {
                m = m.max(eval(x, b)?);
            }
            m
        }
        Expr::Min(xs) => {
            let mut m = T::infinity();
            for x in xs {
                m = m.min(eval(x, b)?);
            }
            m
        }
    })
}

pub(super) fn value_grad<T: Scalar>(e: &Expr<T>, b: &Binding<T>) -> Result<(T, Vec<T>), ExprError> {
    let n = b.point.len();
    Ok(match e {
        Expr::Var(i) => {
            let v = eval(e, b)?;
            let mut g = vec![T::zero(); n];
            g[*i] = T::one();
            (v, g)
        }
        Expr::Param(_) | Expr::Const(_) => (eval(e, b)?, vec![T::zero(); n]),
        Expr::Neg(a) => {
            let (v, g) = value_grad(a, b)?;
            (-v, g.into_iter().map(|x| -x).collect())
        }
        Expr::Add(x, y) => {
            let (vx, gx) = value_grad(x, b)?;
            let (vy, gy) = value_grad(y, b)?;
            (vx + vy, gx.iter().zip(&gy).map(|(a, c)| *a + *c).collect())
        }
        Expr::Sub(x, y) => {
            let (vx, gx) = value_grad(x, b)?;
            let (vy, gy) = value_grad(y, b)?;
            (vx - vy, gx.iter().zip(&gy).map(|(a, c)| *a - *c).collect())
        }
        Expr::Mul(x, y) => {
            let (vx, gx) = value_grad(x, b)?;
            let (vy, gy) = value_grad(y, b)?;
            (
                vx * vy,
                gx.iter().zip(&gy).map(|(a, c)| vy * *a + vx * *c).collect(),
            )
        }
        Expr::Smooth(f, a) => {
            let (v, g) = value_grad(a, b)?;
            let d = f.derivative(v);
            (f.apply(v), g.into_iter().map(|x| d * x).collect())
        }
        Expr::Abs(a) => {
            let (v, g) = value_grad(a, b)?;
            if v < T::zero() {
                (-v, g.into_iter().map(|x| -x).collect())
            } else {
                (v, g)
            }
        }
        Expr::Max(xs) | Expr::Min(xs) => {
            let is_max = matches!(e, Expr::Max(_));
            let mut best: Option<(T, Vec<T>)> = None;
            for x in xs {
                let (v, g) = value_grad(x, b)?;
                let better = match &best {
                    None => true,
                    Some((bv, _)) => (is_max && v > *bv) || (!is_max && v < *bv),
                };
                if better {
                    best = Some((v, g));
                }
            }
            best.expect("max/min has children")
        }
    })
}

/// Result of the bottom-up pass: smooth subtrees keep a gradient, anything
/// containing a kink carries a full quasidifferential.
enum Local<T> {
    Smooth(T, Vec<T>),
    Kinked(T, Quasidifferential<T>),
}

impl<T: Scalar> Local<T> {
    fn value(&self) -> T {
        match self {
            Local::Smooth(v, _) | Local::Kinked(v, _) => *v,
        }
    }

    /// Convex-side representation `[{g}, {0}]` for smooth nodes.
    fn qd(&self) -> Result<Quasidifferential<T>, ExprError> {
        match self {
            Local::Smooth(_, g) => Ok(Quasidifferential::smooth(g.clone())?),
            Local::Kinked(_, q) => Ok(q.clone()),
        }
    }

    fn negated_qd(&self) -> Result<Quasidifferential<T>, ExprError> {
        match self {
            Local::Smooth(_, g) => Ok(Quasidifferential::smooth(g.iter().map(|x| -*x).collect())?),
            Local::Kinked(_, q) => Ok(qd_scale(q, -T::one())),
        }
    }
}

fn local<T: Scalar>(e: &Expr<T>, b: &Binding<T>) -> Result<Local<T>, ExprError> {
    if e.is_smooth() {
        let (v, g) = value_grad(e, b)?;
        return Ok(Local::Smooth(v, g));
    }
    Ok(match e {
        Expr::Var(_) | Expr::Param(_) | Expr::Const(_) => unreachable!("leaves are smooth"),
        Expr::Neg(a) => {
            let a = local(a, b)?;
            Local::Kinked(-a.value(), a.negated_qd()?)
        }
        Expr::Add(x, y) => {
            let (x, y) = (local(x, b)?, local(y, b)?);
            Local::Kinked(x.value() + y.value(), qd_add(&x.qd()?, &y.qd()?)?)
        }
        Expr::Sub(x, y) => {
            let (x, y) = (local(x, b)?, local(y, b)?);
            Local::Kinked(x.value() - y.value(), qd_add(&x.qd()?, &y.negated_qd()?)?)
        }
        Expr::Mul(x, y) => {
            let (x, y) = (local(x, b)?, local(y, b)?);
            let (vx, vy) = (x.value(), y.value());
            Local::Kinked(vx * vy, qd_mul(&x.qd()?, &y.qd()?, vx, vy)?)
        }
        Expr::Smooth(f, a) => {
            let a = local(a, b)?;
            let v = a.value();
            Local::Kinked(f.apply(v), qd_scale(&a.qd()?, f.derivative(v)))
        }
        Expr::Abs(a) => {
            let a = local(a, b)?;
            let v = a.value();
            let q = match &a {
                Local::Smooth(..) => qd_max(&[(v, a.qd()?), (-v, a.negated_qd()?)])?,
                Local::Kinked(_, q) => qd_abs(q, v)?,
            };
            Local::Kinked(v.abs(), q)
        }
        Expr::Max(xs) => {
            let mut items = Vec::with_capacity(xs.len());
            for x in xs {
                let l = local(x, b)?;
                items.push((l.value(), l.qd()?));
            }
            let v = items.iter().map(|(v, _)| *v).fold(T::neg_infinity(), T::max);
            Local::Kinked(v, qd_max(&items)?)
        }
        Expr::Min(xs) => {
            // Smooth children of a min enter on the concave side.
            let mut items = Vec::with_capacity(xs.len());
            for x in xs {
                let l = local(x, b)?;
                let q = match &l {
                    Local::Smooth(_, g) => Quasidifferential::concave_leaf(g.clone())?,
                    Local::Kinked(_, q) => q.clone(),
                };
                items.push((l.value(), q));
            }
            let v = items.iter().map(|(v, _)| *v).fold(T::infinity(), T::min);
            Local::Kinked(v, qd_min(&items)?)
        }
    })
}

/// Quasidifferential of `e` at `b.point`, built bottom-up.
pub fn qd_at<T: Scalar>(e: &Expr<T>, b: &Binding<T>) -> Result<Quasidifferential<T>, ExprError> {
    local(e, b)?.qd()
}

pub fn qd_matrix_at<T: Scalar>(
    es: &[Expr<T>],
    b: &Binding<T>,
) -> Result<MatrixQuasidifferential<T>, ExprError> {
    let rows = es
        .iter()
        .map(|e| qd_at(e, b))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MatrixQuasidifferential::new(rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polytope;

    fn e(s: &str, n: usize) -> Expr<f64> {
        Expr::parse(s, n).unwrap()
    }

    fn seg(a: &[f64], b: &[f64]) -> Polytope<f64> {
        Polytope::segment(a.to_vec(), b.to_vec()).unwrap()
    }

    fn pt(a: &[f64]) -> Polytope<f64> {
        Polytope::point(a.to_vec()).unwrap()
    }

    #[test]
    fn eval_examples() {
        let b = Binding::new(vec![3.0, 1.0]);
        assert_eq!(e("abs(x1) - abs(x2)", 2).eval(&b).unwrap(), 2.0);
        let c = e("min(x1, max(pow(x1, 3), 0))", 1);
        assert_eq!(c.eval(&Binding::new(vec![0.5])).unwrap(), 0.125);
        let f1 = e("max(2*x1, x1) - abs(sin(p*x2))", 2);
        let f2 = e("min(x2, 2*x2) + sin(p*(x1+x2))", 2);
        for p in [-1.0, 0.3, 2.0] {
            let b = Binding::new(vec![0.0, 0.0]).with_param("p", p);
            assert_eq!(f1.eval(&b).unwrap(), 0.0);
            assert_eq!(f2.eval(&b).unwrap(), 0.0);
        }
        assert_eq!(
            f1.eval(&Binding::new(vec![0.0, 0.0])).unwrap_err(),
            ExprError::UnboundParam("p".into())
        );
    }

    #[test]
    fn abs_difference_at_origin() {
        let q = qd_at(&e("abs(x1) - abs(x2)", 2), &Binding::new(vec![0.0, 0.0])).unwrap();
        assert_eq!(q.sub(), &seg(&[-1.0, 0.0], &[1.0, 0.0]));
        assert_eq!(q.sup(), &seg(&[0.0, -1.0], &[0.0, 1.0]));
    }

    #[test]
    fn smooth_leaf_gradient() {
        let q = qd_at(&e("sin(x1)", 3), &Binding::new(vec![0.0, 0.0, 0.0])).unwrap();
        assert_eq!(q.sub(), &pt(&[1.0, 0.0, 0.0]));
        assert!(q.sup().is_origin());
    }

    #[test]
    fn sin_system_quasidifferentials() {
        let p = 1.5;
        let b = Binding::new(vec![0.0, 0.0]).with_param("p", p);
        let q1 = qd_at(&e("max(2*x1, x1) - abs(sin(p*x2))", 2), &b).unwrap();
        assert_eq!(q1.sub(), &seg(&[1.0, 0.0], &[2.0, 0.0]));
        assert_eq!(q1.sup(), &seg(&[0.0, -p], &[0.0, p]));
        let q2 = qd_at(&e("min(x2, 2*x2) + sin(p*(x1+x2))", 2), &b).unwrap();
        assert_eq!(q2.sub(), &pt(&[p, p]));
        assert_eq!(q2.sup(), &seg(&[0.0, 1.0], &[0.0, 2.0]));
    }

    #[test]
    fn distance_function_on_the_graph() {
        // |y - f| with f = |x1| - x2 at y = f(x), x1 > 0.
        let x = vec![0.7, 0.2];
        let f = e("abs(x1) - x2", 2);
        let y = f.eval(&Binding::new(x.clone())).unwrap();
        let psi = (Expr::constant(y) - f).abs();
        let q = qd_at(&psi, &Binding::new(x)).unwrap();
        assert_eq!(q.sub(), &seg(&[0.0, 0.0], &[2.0, -2.0]));
        assert_eq!(q.sup(), &pt(&[-1.0, 1.0]));
    }

    #[test]
    fn nonsmooth_inside_smooth_and_products() {
        let b = Binding::new(vec![0.0]);
        let q = qd_at(&e("sin(abs(x1))", 1), &b).unwrap();
        assert_eq!(q.sub(), &seg(&[-1.0], &[1.0]));
        let q = qd_at(&e("abs(x1)*(x1 + 2)", 1), &b).unwrap();
        assert_eq!(q.dd(&[1.0]).unwrap(), 2.0);
        assert_eq!(q.dd(&[-1.0]).unwrap(), 2.0);
    }

    #[test]
    fn matrix_rows() {
        let b = Binding::new(vec![1.0, 2.0]);
        let mq = qd_matrix_at(&[e("x1*x2", 2), e("x1 - abs(x2)", 2)], &b).unwrap();
        assert_eq!(mq.rows()[0].sub(), &pt(&[2.0, 1.0]));
        assert_eq!(mq.rows()[1].sub(), &pt(&[1.0, 0.0]));
        assert_eq!(mq.rows()[1].sup(), &pt(&[0.0, -1.0]));
        assert_eq!(mq.plus_rows()[1], pt(&[1.0, -1.0]));
    }
}
