//! Problem files: line-oriented `key = value` pairs grouped in sections.
//!
//! ```text
//! [problem]
//! n = 2
//! objective = -x1 + x2
//! equality = abs(x1) - abs(x2)
//! [params]
//! p = 1
//! [point]
//! x = 0, 0
//! [check]
//! K = 2
//! ```
//!
//! `equality` and `inequality` may repeat. Lines starting with `#` or `;`
//! are comments.

use std::collections::BTreeMap;
use std::path::Path;

use quasidiff::regularity::Norm;
use quasidiff::{Expr, ProgramSpec, SystemSpec};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum InputError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("missing `{0}`")]
    Missing(&'static str),
    #[error("{what}: {message}")]
    Expr { what: String, message: String },
    #[error("unbound parameter `{name}` in {what}; add `{name} = <value>` under [params]")]
    UnboundParam { name: String, what: String },
    #[error("point has {found} coordinates, expected n = {expected}")]
    PointLength { expected: usize, found: usize },
    #[error("`{key}`: {message}")]
    Value { key: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub n: usize,
    pub objective: Option<String>,
    pub equalities: Vec<String>,
    pub inequalities: Vec<String>,
    pub params: BTreeMap<String, f64>,
    pub point: Option<Vec<f64>>,
    /// Raw `[check]` entries with their line numbers.
    pub check: BTreeMap<String, (String, usize)>,
}

#[derive(PartialEq, Clone, Copy)]
enum Section {
    None,
    Problem,
    Params,
    Point,
    Check,
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{}` is not a number", t.trim())))
        .collect()
}

/// `y1, y2; z1` into `(y, z)`. The `;` part may be omitted.
pub fn parse_target(s: &str) -> Result<(Vec<f64>, Vec<f64>), String> {
    let mut parts = s.splitn(2, ';');
    let y = parse_list(parts.next().unwrap_or(""))?;
    let z = parse_list(parts.next().unwrap_or(""))?;
    Ok((y, z))
}

impl ProblemFile {
    pub fn read(path: &Path) -> Result<Self, InputError> {
        let text = std::fs::read_to_string(path).map_err(|e| InputError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, InputError> {
        let mut section = Section::None;
        let mut n = None;
        let mut out = ProblemFile {
            n: 0,
            objective: None,
            equalities: Vec::new(),
            inequalities: Vec::new(),
            params: BTreeMap::new(),
            point: None,
            check: BTreeMap::new(),
        };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| InputError::Line { line, message };
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') || t.starts_with(';') {
                continue;
            }
            if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                section = match name.trim() {
                    "problem" => Section::Problem,
                    "params" => Section::Params,
                    "point" => Section::Point,
                    "check" => Section::Check,
                    other => return Err(err(format!("unknown section [{other}]"))),
                };
                continue;
            }
            let Some((key, value)) = t.split_once('=') else {
                return Err(err(format!("expected `key = value`, got `{t}`")));
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(err("empty key".into()));
            }
            match section {
                Section::None => return Err(err(format!("`{key}` outside any section"))),
                Section::Problem => match key {
                    "n" => {
                        if n.is_some() {
                            return Err(err("duplicate `n`".into()));
                        }
                        let v = value
                            .parse::<usize>()
                            .ok()
                            .filter(|v| *v > 0)
                            .ok_or_else(|| err(format!("n must be a positive integer, got `{value}`")))?;
                        n = Some(v);
                    }
                    "objective" => {
                        if out.objective.replace(value.to_string()).is_some() {
                            return Err(err("duplicate `objective`".into()));
                        }
                    }
                    "equality" => out.equalities.push(value.to_string()),
                    "inequality" => out.inequalities.push(value.to_string()),
                    _ => return Err(err(format!("unknown key `{key}` in [problem]"))),
                },
                Section::Params => {
                    let v = value
                        .parse::<f64>()
                        .map_err(|_| err(format!("parameter `{key}` = `{value}` is not a number")))?;
                    if out.params.insert(key.to_string(), v).is_some() {
                        return Err(err(format!("duplicate parameter `{key}`")));
                    }
                }
                Section::Point => {
                    if key != "x" {
                        return Err(err(format!("unknown key `{key}` in [point]")));
                    }
                    if out.point.replace(parse_list(value).map_err(err)?).is_some() {
                        return Err(err("duplicate `x`".into()));
                    }
                }
                Section::Check => {
                    if out.check.insert(key.to_string(), (value.to_string(), line)).is_some() {
                        return Err(err(format!("duplicate `{key}` in [check]")));
                    }
                }
            }
        }
        out.n = n.ok_or(InputError::Missing("n"))?;
        out.validate()?;
        Ok(out)
    }

    fn labelled(&self) -> Vec<(String, &str)> {
        let mut v = Vec::new();
        if let Some(o) = &self.objective {
            v.push(("objective".to_string(), o.as_str()));
        }
        for (j, e) in self.equalities.iter().enumerate() {
            v.push((format!("f{}", j + 1), e.as_str()));
        }
        for (i, e) in self.inequalities.iter().enumerate() {
            v.push((format!("g{}", i + 1), e.as_str()));
        }
        v
    }

    fn validate(&self) -> Result<(), InputError> {
        for (what, text) in self.labelled() {
            let e = Expr::<f64>::parse(text, self.n).map_err(|e| InputError::Expr {
                what: what.clone(),
                message: e.to_string(),
            })?;
            if let Some(name) = e.params_used().into_iter().find(|p| !self.params.contains_key(p)) {
                return Err(InputError::UnboundParam { name, what });
            }
        }
        if let Some(x) = &self.point {
            if x.len() != self.n {
                return Err(InputError::PointLength {
                    expected: self.n,
                    found: x.len(),
                });
            }
        }
        Ok(())
    }

    /// Every expression with its label (`objective`, `f1`, `g1`, ...).
    pub fn expressions(&self) -> Vec<(String, Expr<f64>)> {
        self.labelled()
            .into_iter()
            .map(|(w, t)| (w, Expr::parse(t, self.n).expect("validated")))
            .collect()
    }

    pub fn system(&self) -> Result<SystemSpec<f64>, InputError> {
        let eq: Vec<&str> = self.equalities.iter().map(String::as_str).collect();
        let ineq: Vec<&str> = self.inequalities.iter().map(String::as_str).collect();
        let mut s = SystemSpec::parse(self.n, &eq, &ineq).map_err(|e| InputError::Expr {
            what: "system".into(),
            message: e.to_string(),
        })?;
        s.params = self.params.clone();
        Ok(s)
    }

    pub fn program(&self) -> Result<ProgramSpec<f64>, InputError> {
        let u = self.objective.as_deref().ok_or(InputError::Missing("objective"))?;
        let eq: Vec<&str> = self.equalities.iter().map(String::as_str).collect();
        let ineq: Vec<&str> = self.inequalities.iter().map(String::as_str).collect();
        let mut p = ProgramSpec::parse(self.n, u, &eq, &ineq).map_err(|e| InputError::Expr {
            what: "program".into(),
            message: e.to_string(),
        })?;
        p.params = self.params.clone();
        Ok(p)
    }

    /// `--at` when given, else the `[point]` entry.
    pub fn point_or(&self, at: Option<&str>) -> Result<Vec<f64>, InputError> {
        let x = match at {
            Some(s) => parse_list(s).map_err(|message| InputError::Value {
                key: "--at".into(),
                message,
            })?,
            None => self.point.clone().ok_or(InputError::Missing("x under [point]"))?,
        };
        if x.len() != self.n {
            return Err(InputError::PointLength {
                expected: self.n,
                found: x.len(),
            });
        }
        Ok(x)
    }

    fn check_err(&self, key: &str, message: String) -> InputError {
        match self.check.get(key) {
            Some((_, line)) => InputError::Line {
                line: *line,
                message: format!("`{key}`: {message}"),
            },
            None => InputError::Value {
                key: key.into(),
                message,
            },
        }
    }

    pub fn check_str(&self, key: &str) -> Option<&str> {
        self.check.get(key).map(|(v, _)| v.as_str())
    }

    pub fn check_f64(&self, key: &str, default: f64) -> Result<f64, InputError> {
        match self.check_str(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .map_err(|_| self.check_err(key, format!("`{v}` is not a number"))),
        }
    }

    pub fn check_usize(&self, key: &str, default: usize) -> Result<usize, InputError> {
        match self.check_str(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| self.check_err(key, format!("`{v}` is not a nonnegative integer"))),
        }
    }

    pub fn check_list(&self, key: &str) -> Result<Option<Vec<f64>>, InputError> {
        self.check_str(key)
            .map(|v| parse_list(v).map_err(|m| self.check_err(key, m)))
            .transpose()
    }

    /// `a, b; c, d` into a list of vectors.
    pub fn check_vectors(&self, key: &str) -> Result<Option<Vec<Vec<f64>>>, InputError> {
        self.check_str(key)
            .map(|v| {
                v.split(';')
                    .map(|part| parse_list(part).map_err(|m| self.check_err(key, m)))
                    .collect()
            })
            .transpose()
    }

    pub fn norm(&self) -> Result<Norm, InputError> {
        match self.check_str("norm") {
            None | Some("l1") => Ok(Norm::L1),
            Some("l2") => Ok(Norm::L2),
            Some(v) => Err(self.check_err("norm", format!("expected l1 or l2, got `{v}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_repeats() {
        let f = ProblemFile::parse(
            "# demo\n[problem]\nn = 2\nequality = abs(x1) - abs(x2)\nequality = x1\n\
             inequality = x2\n[params]\np = 1.5\n[point]\nx = 0, 0\n[check]\nK = 2\n",
        )
        .unwrap();
        assert_eq!(f.equalities.len(), 2);
        assert_eq!(f.inequalities, vec!["x2"]);
        assert_eq!(f.params["p"], 1.5);
        assert_eq!(f.point, Some(vec![0.0, 0.0]));
        assert_eq!(f.check_f64("K", 0.0).unwrap(), 2.0);
        assert_eq!(f.check_f64("r", 0.1).unwrap(), 0.1);
    }

    #[test]
    fn errors_name_the_problem() {
        let e = ProblemFile::parse("[problem]\nn = 1\nequality = sin(p*x1)\n").unwrap_err();
        assert!(e.to_string().contains("`p`"), "{e}");
        let e = ProblemFile::parse("[problem]\nn = 2\n[point]\nx = 1\n").unwrap_err();
        assert_eq!(e, InputError::PointLength { expected: 2, found: 1 });
        let e = ProblemFile::parse("[problem]\nn = 2\nbogus\n").unwrap_err();
        assert!(matches!(e, InputError::Line { line: 3, .. }));
        assert_eq!(ProblemFile::parse("[problem]\n").unwrap_err(), InputError::Missing("n"));
        assert!(ProblemFile::parse("[problem]\nn = 1\nequality = x2\n").is_err());
    }

    #[test]
    fn targets() {
        assert_eq!(parse_target("0.5").unwrap(), (vec![0.5], vec![]));
        assert_eq!(parse_target("1, 2; 3").unwrap(), (vec![1.0, 2.0], vec![3.0]));
        assert_eq!(parse_target("; 3").unwrap(), (vec![], vec![3.0]));
    }
}
