//! JSON system descriptions.
//!
//! ```json
//! {
//!   "name": "harmonic",
//!   "dim": 2,
//!   "vars": ["x", "y"],
//!   "field": [[["1", [0, 1]]], [["-1", [1, 0]]]],
//!   "delta": [["1", [1, 0]]],
//!   "involutions": [{"name": "mirror", "S": [["-1", "0"], ["0", "1"]], "b": ["0", "0"], "kind": "reversible"}]
//! }
//! ```
//!
//! Polynomials are term-lists `[coefficient, exponents]`; an expression
//! string such as `"y*(1 - x^2)"` is accepted on input as well.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cycles::Section;
use crate::polycore::{Poly, PolyLiteral, RationalFn};
use crate::symmetry::{AffineInvolution, InvolutionLiteral, SymmetryKind};

#[derive(Debug)]
pub enum ConfigError {
    Io { path: String, source: std::io::Error },
    Json(serde_json::Error),
    Invalid { at: String, msg: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, source } => write!(f, "{path}: {source}"),
            ConfigError::Json(e) => write!(f, "malformed system file: {e}"),
            ConfigError::Invalid { at, msg } => write!(f, "{at}: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(at: impl Into<String>, msg: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid { at: at.into(), msg: msg.to_string() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolyRepr {
    Terms(PolyLiteral),
    Expr(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaFile {
    pub num: PolyRepr,
    pub den: PolyRepr,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaledFile {
    pub field: Vec<PolyRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub den: Option<PolyRepr>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvolutionFile {
    pub name: String,
    #[serde(rename = "S")]
    pub matrix: Vec<Vec<String>>,
    #[serde(default)]
    pub b: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<SymmetryKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<PolyRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<AlphaFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaled: Option<ScaledFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionFile {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitCycleFile {
    pub seed: Vec<f64>,
    pub section: SectionFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dim: usize,
    pub vars: Vec<String>,
    pub field: Vec<PolyRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<AlphaFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<PolyRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaled: Option<ScaledFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub involutions: Vec<InvolutionFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_cycle: Option<LimitCycleFile>,
}

/// `α = num / den`, kept as a pair so specs compare structurally.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaSpec {
    pub num: Poly,
    pub den: Poly,
}

impl AlphaSpec {
    pub fn to_ratfn(&self) -> RationalFn {
        RationalFn::new(self.num.clone(), self.den.clone()).expect("validated nonzero denominator")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScaledSpec {
    pub field: Vec<Poly>,
    pub den: Poly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedInvolution {
    pub name: String,
    pub sigma: AffineInvolution,
    pub kind: Option<SymmetryKind>,
    pub delta: Option<Poly>,
    pub alpha: Option<AlphaSpec>,
    pub scaled: Option<ScaledSpec>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitCycleSpec {
    pub seed: Vec<f64>,
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
}

impl LimitCycleSpec {
    pub fn section(&self) -> Section {
        Section::new(self.point.clone(), self.normal.clone()).expect("validated section")
    }
}

/// A validated system description.
#[derive(Clone, Debug, PartialEq)]
pub struct System {
    pub name: String,
    pub vars: Vec<String>,
    pub field: Vec<Poly>,
    pub alpha: Option<AlphaSpec>,
    pub delta: Option<Poly>,
    pub scaled: Option<ScaledSpec>,
    pub involutions: Vec<NamedInvolution>,
    pub limit_cycle: Option<LimitCycleSpec>,
}

struct Ctx<'a> {
    dim: usize,
    vars: Vec<&'a str>,
}

impl Ctx<'_> {
    fn poly(&self, at: &str, repr: &PolyRepr) -> Result<Poly, ConfigError> {
        match repr {
            PolyRepr::Terms(t) => Poly::from_literal(self.dim, t),
            PolyRepr::Expr(s) => Poly::parse(s, &self.vars),
        }
        .map_err(|e| invalid(at, e))
    }

    fn field(&self, at: &str, reprs: &[PolyRepr]) -> Result<Vec<Poly>, ConfigError> {
        if reprs.len() != self.dim {
            return Err(invalid(at, format!("expected {} components, found {}", self.dim, reprs.len())));
        }
        reprs.iter().enumerate().map(|(i, r)| self.poly(&format!("{at}[{i}]"), r)).collect()
    }

    fn alpha(&self, at: &str, a: &AlphaFile) -> Result<AlphaSpec, ConfigError> {
        let num = self.poly(&format!("{at}.num"), &a.num)?;
        let den = self.poly(&format!("{at}.den"), &a.den)?;
        if den.is_zero() {
            return Err(invalid(format!("{at}.den"), "denominator is the zero polynomial"));
        }
        Ok(AlphaSpec { num, den })
    }

    fn scaled(&self, at: &str, s: &ScaledFile) -> Result<ScaledSpec, ConfigError> {
        let field = self.field(&format!("{at}.field"), &s.field)?;
        let den = match &s.den {
            Some(d) => self.poly(&format!("{at}.den"), d)?,
            None => Poly::one(self.dim),
        };
        if den.is_zero() {
            return Err(invalid(format!("{at}.den"), "denominator is the zero polynomial"));
        }
        Ok(ScaledSpec { field, den })
    }

    fn point(&self, at: &str, v: &[f64]) -> Result<Vec<f64>, ConfigError> {
        if v.len() != self.dim || v.iter().any(|x| !x.is_finite()) {
            return Err(invalid(at, format!("expected {} finite coordinates", self.dim)));
        }
        Ok(v.to_vec())
    }
}

impl System {
    pub fn from_json(src: &str) -> Result<Self, ConfigError> {
        let file: SystemFile = serde_json::from_str(src).map_err(ConfigError::Json)?;
        Self::from_file(&file)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let src = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&src)
    }

    pub fn from_file(f: &SystemFile) -> Result<Self, ConfigError> {
        if f.dim == 0 {
            return Err(invalid("dim", "must be positive"));
        }
        if f.vars.len() != f.dim {
            return Err(invalid("vars", format!("expected {} names, found {}", f.dim, f.vars.len())));
        }
        let ctx = Ctx { dim: f.dim, vars: f.vars.iter().map(String::as_str).collect() };
        let field = ctx.field("field", &f.field)?;
        let alpha = f.alpha.as_ref().map(|a| ctx.alpha("alpha", a)).transpose()?;
        let delta = f.delta.as_ref().map(|d| ctx.poly("delta", d)).transpose()?;
        let scaled = f.scaled.as_ref().map(|s| ctx.scaled("scaled", s)).transpose()?;
        let mut involutions = Vec::with_capacity(f.involutions.len());
        for (i, inv) in f.involutions.iter().enumerate() {
            let at = format!("involutions[{i}]");
            let lit = InvolutionLiteral {
                matrix: inv.matrix.clone(),
                b: inv.b.clone().unwrap_or_else(|| vec!["0".into(); f.dim]),
            };
            let sigma = AffineInvolution::from_literal(&lit).map_err(|e| invalid(format!("{at}.S"), e))?;
            if sigma.dim() != f.dim {
                return Err(invalid(format!("{at}.S"), format!("expected a {0}x{0} matrix", f.dim)));
            }
            involutions.push(NamedInvolution {
                name: inv.name.clone(),
                sigma,
                kind: inv.kind,
                delta: inv.delta.as_ref().map(|d| ctx.poly(&format!("{at}.delta"), d)).transpose()?,
                alpha: inv.alpha.as_ref().map(|a| ctx.alpha(&format!("{at}.alpha"), a)).transpose()?,
                scaled: inv.scaled.as_ref().map(|s| ctx.scaled(&format!("{at}.scaled"), s)).transpose()?,
            });
        }
        let limit_cycle = match &f.limit_cycle {
            None => None,
            Some(lc) => {
                let seed = ctx.point("limit_cycle.seed", &lc.seed)?;
                let point = ctx.point("limit_cycle.section.point", &lc.section.point)?;
                let normal = ctx.point("limit_cycle.section.normal", &lc.section.normal)?;
                Section::new(point.clone(), normal.clone()).map_err(|e| invalid("limit_cycle.section", e))?;
                Some(LimitCycleSpec { seed, point, normal })
            }
        };
        Ok(System {
            name: f.name.clone().unwrap_or_else(|| "system".into()),
            vars: f.vars.clone(),
            field,
            alpha,
            delta,
            scaled,
            involutions,
            limit_cycle,
        })
    }

    pub fn dim(&self) -> usize {
        self.field.len()
    }

    /// Canonical file form with term-list polynomials.
    pub fn to_file(&self) -> SystemFile {
        let terms = |p: &Poly| PolyRepr::Terms(p.to_literal());
        let alpha = |a: &AlphaSpec| AlphaFile { num: terms(&a.num), den: terms(&a.den) };
        let scaled =
            |s: &ScaledSpec| ScaledFile { field: s.field.iter().map(terms).collect(), den: Some(terms(&s.den)) };
        SystemFile {
            name: Some(self.name.clone()),
            dim: self.dim(),
            vars: self.vars.clone(),
            field: self.field.iter().map(terms).collect(),
            alpha: self.alpha.as_ref().map(alpha),
            delta: self.delta.as_ref().map(terms),
            scaled: self.scaled.as_ref().map(scaled),
            involutions: self
                .involutions
                .iter()
                .map(|inv| {
                    let lit = inv.sigma.to_literal();
                    InvolutionFile {
                        name: inv.name.clone(),
                        matrix: lit.matrix,
                        b: Some(lit.b),
                        kind: inv.kind,
                        delta: inv.delta.as_ref().map(terms),
                        alpha: inv.alpha.as_ref().map(alpha),
                        scaled: inv.scaled.as_ref().map(scaled),
                    }
                })
                .collect(),
            limit_cycle: self.limit_cycle.as_ref().map(|lc| LimitCycleFile {
                seed: lc.seed.clone(),
                section: SectionFile { point: lc.point.clone(), normal: lc.normal.clone() },
            }),
        }
    }

    /// Canonical JSON text: objects indented, term-lists and matrices kept on
    /// one line each.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self.to_file()).expect("system file serializes");
        let mut out = String::new();
        write_value(&value, 0, &mut out);
        out
    }

    pub fn var_names(&self) -> Vec<&str> {
        self.vars.iter().map(String::as_str).collect()
    }
}

fn depth(v: &Value) -> usize {
    match v {
        Value::Array(a) => 1 + a.iter().map(depth).max().unwrap_or(0),
        Value::Object(_) => usize::MAX / 2,
        _ => 0,
    }
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(x, indent + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        Value::Array(items) if depth(v) > 3 => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(x, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        _ => out.push_str(&v.to_string()),
    }
}
