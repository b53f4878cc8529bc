use super::{Expr, ExprError, SmoothFn};
use crate::scalar::Scalar;

/// Parses `text` as an expression in the variables `x1..xn`.
pub fn parse<T: Scalar>(text: &str, n: usize) -> Result<Expr<T>, ExprError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        n,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
}

impl<'a> Parser<'a> {
    fn syntax(&self, message: String) -> ExprError {
        ExprError::Syntax {
            offset: self.pos,
            message,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(format!("expected `{}`", c as char)))
        }
    }

    fn expr<T: Scalar>(&mut self) -> Result<Expr<T>, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = lhs + self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = lhs - self.term()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term<T: Scalar>(&mut self) -> Result<Expr<T>, ExprError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            lhs = lhs * self.unary()?;
        }
        Ok(lhs)
    }

    fn unary<T: Scalar>(&mut self) -> Result<Expr<T>, ExprError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            if matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.') {
                let v: T = self.number()?;
                return Ok(Expr::Const(-v));
            }
            return Ok(-self.unary()?);
        }
        self.primary()
    }

    fn number<T: Scalar>(&mut self) -> Result<T, ExprError> {
        self.skip_ws();
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos > s
        };
        let mut any = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            any |= digits(self);
        }
        if !any {
            self.pos = start;
            return Err(self.syntax("malformed number".into()));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if !digits(self) {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let v: f64 = text.parse().map_err(|_| ExprError::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })?;
        Ok(T::lit(v))
    }

    fn ident(&mut self) -> Option<(usize, String)> {
        self.skip_ws();
        let start = self.pos;
        if !matches!(self.src.get(self.pos), Some(c) if c.is_ascii_lowercase()) {
            return None;
        }
        while matches!(self.src.get(self.pos), Some(c) if c.is_ascii_lowercase() || c.is_ascii_digit() || *c == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        Some((start, name.to_string()))
    }

    fn primary<T: Scalar>(&mut self) -> Result<Expr<T>, ExprError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input".into())),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::Const(self.number()?)),
            Some(c) if c.is_ascii_lowercase() => {
                let (offset, name) = self.ident().expect("checked lowercase");
                if self.peek() == Some(b'(') {
                    self.pos += 1;
                    return self.call(offset, &name);
                }
                if let Some(idx) = variable_index(&name) {
                    return match idx {
                        Some(i) if i >= 1 && i <= self.n => Ok(Expr::Var(i - 1)),
                        _ => Err(ExprError::UnknownVariable { name, offset }),
                    };
                }
                if is_function(&name) {
                    self.pos = offset + name.len();
                    return Err(self.syntax(format!("`{name}` must be called")));
                }
                Ok(Expr::Param(name))
            }
            Some(c) => Err(self.syntax(format!("unexpected `{}`", c as char))),
        }
    }

    fn args<T: Scalar>(&mut self) -> Result<Vec<Expr<T>>, ExprError> {
        let mut out = Vec::new();
        if self.peek() == Some(b')') {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b')') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return Err(self.syntax("expected `,` or `)`".into())),
            }
        }
    }

    fn call<T: Scalar>(&mut self, offset: usize, name: &str) -> Result<Expr<T>, ExprError> {
        let arity = |expected: &str, found: usize| ExprError::Arity {
            name: name.to_string(),
            expected: expected.to_string(),
            found,
            offset,
        };
        match name {
            "pow" => {
                let base = self.expr()?;
                self.expect(b',')?;
                self.skip_ws();
                let k_at = self.pos;
                let k: f64 = self.number().map_err(|_| ExprError::BadExponent { offset: k_at })?;
                if k < 1.0 || k.fract() != 0.0 || k > u32::MAX as f64 {
                    return Err(ExprError::BadExponent { offset: k_at });
                }
                match self.peek() {
                    Some(b')') => self.pos += 1,
                    Some(b',') => {
                        self.pos += 1;
                        let rest = self.args::<T>()?;
                        return Err(arity("2", 2 + rest.len()));
                    }
                    _ => return Err(ExprError::BadExponent { offset: k_at }),
                }
                Ok(base.pow(k as u32))
            }
            "sin" | "cos" | "exp" | "abs" => {
                let mut a = self.args()?;
                if a.len() != 1 {
                    return Err(arity("1", a.len()));
                }
                let a = a.pop().expect("one argument");
                Ok(match name {
                    "sin" => Expr::Smooth(SmoothFn::Sin, Box::new(a)),
                    "cos" => Expr::Smooth(SmoothFn::Cos, Box::new(a)),
                    "exp" => Expr::Smooth(SmoothFn::Exp, Box::new(a)),
                    _ => Expr::Abs(Box::new(a)),
                })
            }
            "max" | "min" => {
                let a = self.args()?;
                if a.len() < 2 {
                    return Err(arity("at least 2", a.len()));
                }
                Ok(if name == "max" { Expr::Max(a) } else { Expr::Min(a) })
            }
            _ => Err(ExprError::UnknownFunction {
                name: name.to_string(),
                offset,
            }),
        }
    }
}

fn is_function(name: &str) -> bool {
    matches!(name, "sin" | "cos" | "exp" | "pow" | "abs" | "max" | "min")
}

/// `Some(Some(k))` for `xk`, `Some(None)` for an `x`-digits name that does not fit a usize.
fn variable_index(name: &str) -> Option<Option<usize>> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
        return None;
    }
    Some(digits.parse().ok())
}
