//! Exact multivariate polynomials and rational functions over `Q`.
//!
//! Coefficients are [`BigRational`]; terms are kept in a `BTreeMap` keyed by
//! dense exponent vectors, so two polynomials are equal iff their term maps
//! are equal. Floating point only enters at evaluation time, through
//! [`Poly::eval`] or a [`CompiledPoly`].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::symmetry::AffineInvolution;

pub type Rational = BigRational;

/// Exponent multi-index, one entry per variable.
pub type Exponent = Vec<u32>;

/// Serialized form of a polynomial: `[[coefficient, [e1, ..., en]], ...]`.
pub type PolyLiteral = Vec<(String, Vec<u32>)>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("dimension mismatch: expected {expected} variables, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("denominator vanishes at {point:?}")]
    DenominatorVanishes { point: Vec<f64> },
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("invalid coefficient `{0}` (expected an integer or p/q)")]
    BadCoefficient(String),
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// Parse a rational literal such as `"3"`, `"-7/2"`.
pub fn parse_rational(s: &str) -> Result<Rational, PolyError> {
    let t = s.trim();
    let bad = || PolyError::BadCoefficient(s.to_string());
    match t.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(BigInt::from_str(t).map_err(|_| bad())?)),
    }
}

/// Canonical string for a rational: `p` or `p/q` in lowest terms.
pub fn rational_to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Ratio::to_f64 only fails on overflow of both parts.
        r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
    })
}

pub fn rational(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn integer(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Exponent, Rational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    /// The coordinate polynomial `x_index`.
    ///
    /// Panics if `index >= nvars`.
    pub fn var(nvars: usize, index: usize) -> Self {
        assert!(index < nvars, "variable {index} out of range for {nvars} variables");
        let mut e = vec![0; nvars];
        e[index] = 1;
        let mut p = Self::zero(nvars);
        p.terms.insert(e, Rational::one());
        p
    }

    /// Builds a polynomial from `(coefficient, exponent)` pairs. Repeated
    /// exponents are summed and zero coefficients dropped.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Rational, Exponent)>,
    {
        let mut p = Self::zero(nvars);
        for (c, e) in terms {
            if e.len() != nvars {
                return Err(PolyError::DimensionMismatch { expected: nvars, found: e.len() });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Exponent, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &[u32]) -> Rational {
        self.terms.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    fn check_same(&self, other: &Poly) -> Result<(), PolyError> {
        if self.nvars != other.nvars {
            return Err(PolyError::DimensionMismatch { expected: self.nvars, found: other.nvars });
        }
        Ok(())
    }

    pub fn arith(&self, other: &Poly, op: ArithOp) -> Result<Poly, PolyError> {
        self.check_same(other)?;
        Ok(match op {
            ArithOp::Add => self.add_unchecked(other, false),
            ArithOp::Sub => self.add_unchecked(other, true),
            ArithOp::Mul => self.mul_unchecked(other),
        })
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.arith(other, ArithOp::Add)
    }

    pub fn checked_sub(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.arith(other, ArithOp::Sub)
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.arith(other, ArithOp::Mul)
    }

    fn add_unchecked(&self, other: &Poly, negate: bool) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            let c = if negate { -c.clone() } else { c.clone() };
            out.add_term(e.clone(), c);
        }
        out
    }

    fn mul_unchecked(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Exponent = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        let mut out = Poly::zero(self.nvars);
        if c.is_zero() {
            return out;
        }
        out.terms = self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect();
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut result = Poly::one(self.nvars);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul_unchecked(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        result
    }

    /// Floating-point evaluation by summing terms.
    pub fn eval(&self, point: &[f64]) -> Result<f64, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::DimensionMismatch { expected: self.nvars, found: point.len() });
        }
        Ok(self.terms.iter().map(|(e, c)| rational_to_f64(c) * monomial_f64(e, point)).sum())
    }

    pub fn eval_exact(&self, point: &[Rational]) -> Result<Rational, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::DimensionMismatch { expected: self.nvars, found: point.len() });
        }
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    m *= num_traits::pow(x.clone(), k as usize);
                }
            }
            acc += m;
        }
        Ok(acc)
    }

    /// Substitutes `x_i -> images[i]`. All images must share one variable count,
    /// which becomes the variable count of the result.
    pub fn compose(&self, images: &[Poly]) -> Result<Poly, PolyError> {
        if images.len() != self.nvars {
            return Err(PolyError::DimensionMismatch { expected: self.nvars, found: images.len() });
        }
        let target = images.first().map(|p| p.nvars).unwrap_or(0);
        for im in images {
            if im.nvars != target {
                return Err(PolyError::DimensionMismatch { expected: target, found: im.nvars });
            }
        }
        // powers[i][k] = images[i]^k, grown lazily
        let mut powers: Vec<Vec<Poly>> = images.iter().map(|_| vec![Poly::one(target)]).collect();
        let mut out = Poly::zero(target);
        for (e, c) in &self.terms {
            let mut term = Poly::constant(target, c.clone());
            for (i, &k) in e.iter().enumerate() {
                let k = k as usize;
                while powers[i].len() <= k {
                    let next = powers[i].last().unwrap().mul_unchecked(&images[i]);
                    powers[i].push(next);
                }
                if k > 0 {
                    term = term.mul_unchecked(&powers[i][k]);
                }
            }
            out = out.add_unchecked(&term, false);
        }
        Ok(out)
    }

    /// `p(A z + c)` for an affine map given by rows of `A` and offset `c`.
    pub fn compose_affine_map(&self, matrix: &[Vec<Rational>], offset: &[Rational]) -> Result<Poly, PolyError> {
        let n = self.nvars;
        if matrix.len() != n || offset.len() != n {
            return Err(PolyError::DimensionMismatch { expected: n, found: matrix.len().min(offset.len()) });
        }
        let mut images = Vec::with_capacity(n);
        for (row, c) in matrix.iter().zip(offset) {
            if row.len() != n {
                return Err(PolyError::DimensionMismatch { expected: n, found: row.len() });
            }
            let mut img = Poly::constant(n, c.clone());
            for (j, a) in row.iter().enumerate() {
                img = img.add_unchecked(&Poly::var(n, j).scale(a), false);
            }
            images.push(img);
        }
        self.compose(&images)
    }

    /// `p ∘ σ`.
    pub fn compose_affine(&self, sigma: &AffineInvolution) -> Result<Poly, PolyError> {
        if sigma.dim() != self.nvars {
            return Err(PolyError::DimensionMismatch { expected: self.nvars, found: sigma.dim() });
        }
        self.compose_affine_map(sigma.matrix(), sigma.offset())
    }

    /// Partial derivative with respect to `x_var`.
    ///
    /// Panics if `var >= nvars`.
    pub fn partial(&self, var: usize) -> Poly {
        assert!(var < self.nvars, "variable {var} out of range for {} variables", self.nvars);
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[var] -= 1;
            out.add_term(e2, c * integer(e[var] as i64));
        }
        out
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (rational_to_f64(c), e.clone())).collect(),
        }
    }

    pub fn to_literal(&self) -> PolyLiteral {
        self.terms.iter().map(|(e, c)| (rational_to_string(c), e.clone())).collect()
    }

    pub fn from_literal(nvars: usize, lit: &[(String, Vec<u32>)]) -> Result<Poly, PolyError> {
        let mut terms = Vec::with_capacity(lit.len());
        for (c, e) in lit {
            terms.push((parse_rational(c)?, e.clone()));
        }
        Poly::from_terms(nvars, terms)
    }

    /// Parses an expression such as `y*(1 - x^2) + 3/2*x*y` over the given
    /// variable names. Supports `+ - * ^`, parentheses, integer constants and
    /// division by constants.
    pub fn parse(src: &str, vars: &[&str]) -> Result<Poly, PolyError> {
        let mut p = ExprParser { src: src.as_bytes(), pos: 0, vars };
        let out = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(out)
    }

    pub fn display_with<'a>(&'a self, vars: &'a [&'a str]) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, vars: Some(vars) }
    }
}

fn monomial_f64(e: &[u32], point: &[f64]) -> f64 {
    e.iter().zip(point).fold(1.0, |m, (&k, &x)| if k == 0 { m } else { m * x.powi(k as i32) })
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Rational::one())
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

// Operator forms panic on a variable-count mismatch; use `arith` for the
// fallible version.
macro_rules! poly_binop {
    ($trait:ident, $method:ident, $op:expr) => {
        impl $trait<&Poly> for &Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly {
                self.arith(rhs, $op).expect("polynomial variable counts differ")
            }
        }
        impl $trait<Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly {
                (&self).$method(rhs)
            }
        }
        impl $trait<Poly> for &Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                self.$method(&rhs)
            }
        }
    };
}

poly_binop!(Add, add, ArithOp::Add);
poly_binop!(Sub, sub, ArithOp::Sub);
poly_binop!(Mul, mul, ArithOp::Mul);

pub struct PolyDisplay<'a> {
    poly: &'a Poly,
    vars: Option<&'a [&'a str]>,
}

fn default_var_name(nvars: usize, i: usize) -> String {
    if nvars <= 3 {
        ["x", "y", "z"][i].to_string()
    } else {
        format!("x{}", i + 1)
    }
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.poly;
        if p.is_zero() {
            return write!(f, "0");
        }
        // highest total degree first
        let mut terms: Vec<_> = p.terms.iter().collect();
        terms.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        for (k, (e, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let mut factors = Vec::new();
            let is_const = e.iter().all(|&x| x == 0);
            if !mag.is_one() || is_const {
                factors.push(rational_to_string(&mag));
            }
            for (i, &x) in e.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                let name = match self.vars {
                    Some(v) if i < v.len() => v[i].to_string(),
                    _ => default_var_name(p.nvars, i),
                };
                if x == 1 {
                    factors.push(name);
                } else {
                    factors.push(format!("{name}^{x}"));
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        PolyDisplay { poly: self, vars: None }.fmt(f)
    }
}

struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [&'a str],
}

impl ExprParser<'_> {
    fn error(&self, msg: &str) -> PolyError {
        PolyError::Parse { pos: self.pos, msg: msg.to_string() }
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

    fn nvars(&self) -> usize {
        self.vars.len()
    }

    fn expr(&mut self) -> Result<Poly, PolyError> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    acc = acc.add_unchecked(&self.term()?, false);
                }
                b'-' => {
                    self.pos += 1;
                    acc = acc.add_unchecked(&self.term()?, true);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly, PolyError> {
        let mut acc = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.pos += 1;
                    acc = acc.mul_unchecked(&self.unary()?);
                }
                b'/' => {
                    self.pos += 1;
                    let d = self.unary()?;
                    let c = match (d.degree(), d.terms.values().next()) {
                        (Some(0), Some(c)) => c.clone(),
                        _ => return Err(self.error("division only by nonzero constants")),
                    };
                    acc = acc.scale(&c.recip());
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly, PolyError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Poly, PolyError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let n: u32 = digits.parse().map_err(|_| self.error("expected exponent"))?;
            return Ok(base.pow(n));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let n = BigInt::from_str(digits).map_err(|_| self.error("bad integer"))?;
                Ok(Poly::constant(self.nvars(), BigRational::from_integer(n)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(Poly::var(self.nvars(), i)),
                    None => {
                        self.pos = start;
                        Err(self.error(&format!("unknown variable `{name}`")))
                    }
                }
            }
            _ => Err(self.error("expected a number, variable or `(`")),
        }
    }
}

/// Floating-point image of a [`Poly`] for hot evaluation loops.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    nvars: usize,
    terms: Vec<(f64, Exponent)>,
}

impl CompiledPoly {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Caller guarantees `point.len() == nvars`.
    #[inline]
    pub fn eval(&self, point: &[f64]) -> f64 {
        self.terms.iter().map(|(c, e)| c * monomial_f64(e, point)).sum()
    }
}

/// Quotient of two polynomials, stored uncancelled.
#[derive(Clone, Debug)]
pub struct RationalFn {
    num: Poly,
    den: Poly,
}

impl RationalFn {
    pub fn new(num: Poly, den: Poly) -> Result<Self, PolyError> {
        num.check_same(&den)?;
        if den.is_zero() {
            return Err(PolyError::ZeroDenominator);
        }
        Ok(RationalFn { num, den })
    }

    pub fn from_poly(p: Poly) -> Self {
        let den = Poly::one(p.nvars);
        RationalFn { num: p, den }
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64, PolyError> {
        let d = self.den.eval(point)?;
        if d == 0.0 {
            return Err(PolyError::DenominatorVanishes { point: point.to_vec() });
        }
        Ok(self.num.eval(point)? / d)
    }

    pub fn eval_exact(&self, point: &[Rational]) -> Result<Rational, PolyError> {
        let d = self.den.eval_exact(point)?;
        if d.is_zero() {
            return Err(PolyError::DenominatorVanishes { point: point.iter().map(rational_to_f64).collect() });
        }
        Ok(self.num.eval_exact(point)? / d)
    }

    pub fn compose_affine(&self, sigma: &AffineInvolution) -> Result<RationalFn, PolyError> {
        Ok(RationalFn { num: self.num.compose_affine(sigma)?, den: self.den.compose_affine(sigma)? })
    }

    /// Equality of `p1/q1` and `p2/q2` via `p1 q2 == p2 q1`.
    pub fn cross_eq(&self, other: &RationalFn) -> bool {
        self.nvars() == other.nvars() && &self.num * &other.den == &other.num * &self.den
    }
}

impl fmt::Display for RationalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Poly {
        Poly::parse(s, &["x", "y"]).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p("x^2 + y^2").eval(&[3.0, 4.0]).unwrap(), 25.0);
        assert_eq!(Poly::zero(2).eval(&[1.5, -2.0]).unwrap(), 0.0);
        assert_eq!(p("1 - (x+y)^2").eval(&[0.5, -0.5]).unwrap(), 1.0);
        assert!(matches!(p("x").eval(&[1.0]), Err(PolyError::DimensionMismatch { expected: 2, found: 1 })));
    }

    #[test]
    fn arith_examples() {
        assert_eq!(&p("x") * &p("x"), p("x^2"));
        assert_eq!(&p("1 - x") * &p("1 + x"), p("1 - x^2"));
        let z = &p("x") - &p("x");
        assert!(z.is_zero());
        assert_eq!(z.len(), 0);
        let q = Poly::var(3, 0);
        assert!(p("x").arith(&q, ArithOp::Add).is_err());
    }

    #[test]
    fn compose_examples() {
        let mirror = AffineInvolution::reflect_axis(2, 0);
        let neg = AffineInvolution::point_reflection(2);
        assert_eq!(p("x").compose_affine(&mirror).unwrap(), p("-x"));
        assert_eq!(p("1 - x^2").compose_affine(&mirror).unwrap(), p("1 - x^2"));
        assert_eq!(p("x + y").compose_affine(&neg).unwrap(), p("-x - y"));
        assert!(Poly::var(3, 0).compose_affine(&neg).is_err());
    }

    #[test]
    fn partial_examples() {
        assert_eq!(p("x^2*y").partial(0), p("2*x*y"));
        assert!(p("x^2").partial(1).is_zero());
        assert_eq!(p("1 - (x+y)^2").partial(0), p("-2*(x+y)"));
    }

    #[test]
    fn ratfn_eval_examples() {
        let alpha = RationalFn::new(Poly::one(2), p("1 + x")).unwrap();
        assert_eq!(alpha.eval(&[0.0, 0.0]).unwrap(), 1.0);
        assert!(matches!(alpha.eval(&[-1.0, 0.0]), Err(PolyError::DenominatorVanishes { .. })));
        assert!((alpha.eval(&[0.5, 0.0]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(RationalFn::new(Poly::one(2), Poly::zero(2)).is_err());
    }

    #[test]
    fn literal_and_display() {
        let q = p("3/2*x^2*y - 7 + y");
        let lit = q.to_literal();
        assert!(lit.contains(&("3/2".to_string(), vec![2, 1])));
        assert!(lit.contains(&("-7".to_string(), vec![0, 0])));
        assert_eq!(Poly::from_literal(2, &lit).unwrap(), q);
        assert_eq!(q.to_string(), "3/2*x^2*y + y - 7");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert_eq!(parse_rational(" -6/4 ").unwrap(), rational(-3, 2));
    }

    #[test]
    fn parse_errors() {
        assert!(Poly::parse("x + w", &["x", "y"]).is_err());
        assert!(Poly::parse("x / y", &["x", "y"]).is_err());
        assert!(Poly::parse("(x + y", &["x", "y"]).is_err());
        assert_eq!(p("x/3"), Poly::var(2, 0).scale(&rational(1, 3)));
    }

    #[test]
    fn exact_eval_and_cross_eq() {
        let a = RationalFn::new(p("2"), p("2 + 2*x")).unwrap();
        let b = RationalFn::new(Poly::one(2), p("1 + x")).unwrap();
        assert!(a.cross_eq(&b));
        let v = a.eval_exact(&[rational(1, 3), integer(5)]).unwrap();
        assert_eq!(v, rational(3, 4));
    }
}
