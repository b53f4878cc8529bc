//! Report model shared by the text output and the JSON sidecar.
//!
//! The text is rendered from the same [`Report`] value that is serialized,
//! so reading the sidecar back and calling [`Report::render`] reproduces the
//! text byte for byte.

use std::fmt::Write as _;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// `f64` that serializes non-finite values as the strings `inf`, `-inf`, `nan`.
#[derive(Debug, Clone, Copy)]
pub struct Num(pub f64);

impl PartialEq for Num {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits() || (self.0.is_nan() && other.0.is_nan())
    }
}

impl Num {
    pub fn text(self) -> String {
        let x = self.0;
        if x.is_nan() {
            "nan".into()
        } else if x.is_infinite() {
            if x > 0.0 { "inf".into() } else { "-inf".into() }
        } else if x == 0.0 {
            "0".into()
        } else {
            format!("{x}")
        }
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&self.text())
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            F(f64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::F(x) => Ok(Num(x)),
            Raw::S(s) => match s.as_str() {
                "inf" => Ok(Num(f64::INFINITY)),
                "-inf" => Ok(Num(f64::NEG_INFINITY)),
                "nan" => Ok(Num(f64::NAN)),
                other => Err(serde::de::Error::custom(format!("bad number `{other}`"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Value {
    Num(Num),
    Int(u64),
    Bool(bool),
    Text(String),
    Vector(Vec<Num>),
    Indices(Vec<u64>),
    /// Vertex list of a polytope.
    Points(Vec<Vec<Num>>),
}

fn vec_text(v: &[Num]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.text()).collect();
    format!("({})", parts.join(", "))
}

impl Value {
    pub fn num(x: f64) -> Self {
        Value::Num(Num(x))
    }

    pub fn vector(v: &[f64]) -> Self {
        Value::Vector(v.iter().map(|x| Num(*x)).collect())
    }

    pub fn points(v: &[Vec<f64>]) -> Self {
        Value::Points(v.iter().map(|p| p.iter().map(|x| Num(*x)).collect()).collect())
    }

    pub fn indices(v: &[usize]) -> Self {
        Value::Indices(v.iter().map(|i| *i as u64).collect())
    }

    pub fn text(&self) -> String {
        match self {
            Value::Num(x) => x.text(),
            Value::Int(i) => i.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Text(s) => s.clone(),
            Value::Vector(v) => vec_text(v),
            Value::Indices(v) => {
                let parts: Vec<String> = v.iter().map(u64::to_string).collect();
                format!("[{}]", parts.join(", "))
            }
            Value::Points(ps) => {
                let parts: Vec<String> = ps.iter().map(|p| vec_text(p)).collect();
                format!("co{{{}}}", parts.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub key: String,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub title: String,
    pub items: Vec<Item>,
}

impl Section {
    pub fn new(title: impl Into<String>) -> Self {
        Section {
            title: title.into(),
            items: Vec::new(),
        }
    }

    pub fn push(&mut self, key: impl Into<String>, value: Value) -> &mut Self {
        self.items.push(Item {
            key: key.into(),
            value,
        });
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub file: String,
    pub seed: u64,
    pub tol: Num,
    pub sections: Vec<Section>,
    pub verdict: String,
}

impl Report {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "quasidiff {}", self.command);
        let _ = writeln!(out, "file: {}", self.file);
        let _ = writeln!(out, "seed: {}", self.seed);
        let _ = writeln!(out, "tol: {}", self.tol.text());
        for s in &self.sections {
            let _ = writeln!(out, "[{}]", s.title);
            for it in &s.items {
                let _ = writeln!(out, "  {}: {}", it.key, it.value.text());
            }
        }
        let _ = writeln!(out, "verdict: {}", self.verdict);
        out
    }
}
