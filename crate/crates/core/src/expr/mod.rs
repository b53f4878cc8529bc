//! Scalar expressions over `x1..xn` and named parameters: parsing, printing,
//! evaluation, gradients and quasidifferentials at a point.

mod eval;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops;

use thiserror::Error;

use crate::qd::QdError;
use crate::scalar::Scalar;

pub use eval::{qd_at, qd_matrix_at};
pub use parse::parse;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothFn {
    Sin,
    Cos,
    Exp,
    /// Integer power `k >= 1`.
    Pow(u32),
}

impl SmoothFn {
    pub(crate) fn apply<T: Scalar>(self, v: T) -> T {
        match self {
            SmoothFn::Sin => v.sin(),
            SmoothFn::Cos => v.cos(),
            SmoothFn::Exp => v.exp(),
            SmoothFn::Pow(k) => v.powi(k as i32),
        }
    }

    pub(crate) fn derivative<T: Scalar>(self, v: T) -> T {
        match self {
            SmoothFn::Sin => v.cos(),
            SmoothFn::Cos => -v.sin(),
            SmoothFn::Exp => v.exp(),
            SmoothFn::Pow(k) => T::lit(k as f64) * v.powi(k as i32 - 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr<T = f64> {
    /// Zero-based variable index; printed as `x{i+1}`.
    Var(usize),
    Param(String),
    Const(T),
    Neg(Box<Expr<T>>),
    Add(Box<Expr<T>>, Box<Expr<T>>),
    Sub(Box<Expr<T>>, Box<Expr<T>>),
    Mul(Box<Expr<T>>, Box<Expr<T>>),
    Smooth(SmoothFn, Box<Expr<T>>),
    Abs(Box<Expr<T>>),
    Max(Vec<Expr<T>>),
    Min(Vec<Expr<T>>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("unknown variable `{name}` at byte {offset}")]
    UnknownVariable { name: String, offset: usize },
    #[error("`{name}` at byte {offset} takes {expected} argument(s), got {found}")]
    Arity {
        name: String,
        expected: String,
        found: usize,
        offset: usize,
    },
    #[error("pow exponent at byte {offset} must be an integer literal >= 1")]
    BadExponent { offset: usize },
    #[error("unbound parameter `{0}`")]
    UnboundParam(String),
    #[error("variable x{index} out of range for a point of length {len}")]
    PointDimension { index: usize, len: usize },
    #[error(transparent)]
    Qd(#[from] QdError),
}

/// Evaluation point `x` together with parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct Binding<T = f64> {
    pub point: Vec<T>,
    pub params: BTreeMap<String, T>,
}

impl<T: Scalar> Binding<T> {
    pub fn new(point: Vec<T>) -> Self {
        Binding {
            point,
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, name: &str, value: T) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn at(&self, point: Vec<T>) -> Self {
        Binding {
            point,
            params: self.params.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.point.len()
    }
}

impl<T: Scalar> Expr<T> {
    pub fn parse(text: &str, n: usize) -> Result<Self, ExprError> {
        parse(text, n)
    }

    pub fn var(i: usize) -> Self {
        Expr::Var(i)
    }

    pub fn constant(c: T) -> Self {
        Expr::Const(c)
    }

    pub fn param(name: &str) -> Self {
        Expr::Param(name.to_string())
    }

    pub fn abs(self) -> Self {
        Expr::Abs(Box::new(self))
    }

    pub fn sin(self) -> Self {
        Expr::Smooth(SmoothFn::Sin, Box::new(self))
    }

    pub fn cos(self) -> Self {
        Expr::Smooth(SmoothFn::Cos, Box::new(self))
    }

    pub fn exp(self) -> Self {
        Expr::Smooth(SmoothFn::Exp, Box::new(self))
    }

    pub fn pow(self, k: u32) -> Self {
        Expr::Smooth(SmoothFn::Pow(k), Box::new(self))
    }

    pub fn max_of(items: Vec<Self>) -> Self {
        Expr::Max(items)
    }

    pub fn min_of(items: Vec<Self>) -> Self {
        Expr::Min(items)
    }

    pub fn eval(&self, b: &Binding<T>) -> Result<T, ExprError> {
        eval::eval(self, b)
    }

    /// Value and gradient; at kinks the gradient of the first active
    /// branch is used.
    pub fn value_grad(&self, b: &Binding<T>) -> Result<(T, Vec<T>), ExprError> {
        eval::value_grad(self, b)
    }

    pub fn qd_at(&self, b: &Binding<T>) -> Result<crate::qd::Quasidifferential<T>, ExprError> {
        qd_at(self, b)
    }

    /// No `abs`, `max` or `min` anywhere in the tree.
    pub fn is_smooth(&self) -> bool {
        match self {
            Expr::Var(_) | Expr::Param(_) | Expr::Const(_) => true,
            Expr::Neg(a) | Expr::Smooth(_, a) => a.is_smooth(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.is_smooth() && b.is_smooth(),
            Expr::Abs(_) | Expr::Max(_) | Expr::Min(_) => false,
        }
    }

    pub fn params_used(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Param(p) => {
                out.insert(p.clone());
            }
            Expr::Var(_) | Expr::Const(_) => {}
            Expr::Neg(a) | Expr::Smooth(_, a) | Expr::Abs(a) => a.collect_params(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
            Expr::Max(xs) | Expr::Min(xs) => xs.iter().for_each(|x| x.collect_params(out)),
        }
    }

    /// Largest variable index used plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Var(i) => i + 1,
            Expr::Param(_) | Expr::Const(_) => 0,
            Expr::Neg(a) | Expr::Smooth(_, a) | Expr::Abs(a) => a.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.arity().max(b.arity()),
            Expr::Max(xs) | Expr::Min(xs) => xs.iter().map(Expr::arity).max().unwrap_or(0),
        }
    }

    /// Replaces every parameter with its bound value.
    pub fn substitute(&self, params: &BTreeMap<String, T>) -> Self {
        let rec = |e: &Expr<T>| Box::new(e.substitute(params));
        match self {
            Expr::Param(p) => match params.get(p) {
                Some(v) => Expr::Const(*v),
                None => self.clone(),
            },
            Expr::Var(_) | Expr::Const(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(rec(a)),
            Expr::Smooth(f, a) => Expr::Smooth(*f, rec(a)),
            Expr::Abs(a) => Expr::Abs(rec(a)),
            Expr::Add(a, b) => Expr::Add(rec(a), rec(b)),
            Expr::Sub(a, b) => Expr::Sub(rec(a), rec(b)),
            Expr::Mul(a, b) => Expr::Mul(rec(a), rec(b)),
            Expr::Max(xs) => Expr::Max(xs.iter().map(|x| x.substitute(params)).collect()),
            Expr::Min(xs) => Expr::Min(xs.iter().map(|x| x.substitute(params)).collect()),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            _ => 3,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let paren = self.precedence() < min_prec;
        if paren {
            write!(f, "(")?;
        }
        match self {
            Expr::Var(i) => write!(f, "x{}", i + 1)?,
            Expr::Param(p) => write!(f, "{p}")?,
            Expr::Const(c) => write!(f, "{c}")?,
            Expr::Neg(a) => {
                write!(f, "-(")?;
                a.fmt_at(f, 0)?;
                write!(f, ")")?;
            }
            Expr::Add(a, b) => {
                a.fmt_at(f, 1)?;
                write!(f, " + ")?;
                b.fmt_at(f, 2)?;
            }
            Expr::Sub(a, b) => {
                a.fmt_at(f, 1)?;
                write!(f, " - ")?;
                b.fmt_at(f, 2)?;
            }
            Expr::Mul(a, b) => {
                a.fmt_at(f, 2)?;
                write!(f, "*")?;
                b.fmt_at(f, 3)?;
            }
            Expr::Smooth(kind, a) => {
                match kind {
                    SmoothFn::Sin => write!(f, "sin(")?,
                    SmoothFn::Cos => write!(f, "cos(")?,
                    SmoothFn::Exp => write!(f, "exp(")?,
                    SmoothFn::Pow(_) => write!(f, "pow(")?,
                }
                a.fmt_at(f, 0)?;
                if let SmoothFn::Pow(k) = kind {
                    write!(f, ", {k}")?;
                }
                write!(f, ")")?;
            }
            Expr::Abs(a) => {
                write!(f, "abs(")?;
                a.fmt_at(f, 0)?;
                write!(f, ")")?;
            }
            Expr::Max(xs) | Expr::Min(xs) => {
                let name = if matches!(self, Expr::Max(_)) { "max" } else { "min" };
                write!(f, "{name}(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    x.fmt_at(f, 0)?;
                }
                write!(f, ")")?;
            }
        }
        if paren {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl<T: Scalar> fmt::Display for Expr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

impl<T> ops::Add for Expr<T> {
    type Output = Expr<T>;
    fn add(self, rhs: Self) -> Self {
        Expr::Add(Box::new(self), Box::new(rhs))
    }
}

impl<T> ops::Sub for Expr<T> {
    type Output = Expr<T>;
    fn sub(self, rhs: Self) -> Self {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl<T> ops::Mul for Expr<T> {
    type Output = Expr<T>;
    fn mul(self, rhs: Self) -> Self {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }
}

impl<T> ops::Neg for Expr<T> {
    type Output = Expr<T>;
    fn neg(self) -> Self {
        Expr::Neg(Box::new(self))
    }
}
