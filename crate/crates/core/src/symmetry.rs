//! Affine involutions and the exact reversibility, symmetry, oddness and
//! compatibility conditions on polynomial data.
//!
//! For an affine involution `σ(z) = S z + b` the Jacobian is the constant
//! matrix `S`, so the differential criteria
//!
//! * reversible: `V(σ(z)) = -S V(z)`
//! * symmetric:  `V(σ(z)) =  S V(z)`
//!
//! are polynomial identities and can be decided exactly.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polycore::{parse_rational, rational_to_f64, rational_to_string, Poly, PolyError, Rational, RationalFn};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymmetryError {
    #[error("not an involution: {0}")]
    NotAnInvolution(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("alpha has zero numerator; delta = 1/alpha - 1 is undefined")]
    ZeroAlpha,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Anything that maps points to points and squares to the identity. The
/// numerical modules only need to evaluate the map.
pub trait Involution: Send + Sync {
    fn dim(&self) -> usize;
    fn apply(&self, z: &[f64]) -> Vec<f64>;
}

/// Wraps a closure as a black-box involution. The involution property is the
/// caller's responsibility.
pub struct FnInvolution<F> {
    dim: usize,
    map: F,
}

impl<F> FnInvolution<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(dim: usize, map: F) -> Self {
        FnInvolution { dim, map }
    }
}

impl<F> Involution for FnInvolution<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, z: &[f64]) -> Vec<f64> {
        (self.map)(z)
    }
}

/// `σ(z) = S z + b` with `S² = I` and `S b + b = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineInvolution {
    matrix: Vec<Vec<Rational>>,
    offset: Vec<Rational>,
    matrix_f64: Vec<Vec<f64>>,
    offset_f64: Vec<f64>,
}

/// Config-file form: `{"S": [["-1","0"],["0","1"]], "b": ["0","0"]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvolutionLiteral {
    #[serde(rename = "S")]
    pub matrix: Vec<Vec<String>>,
    pub b: Vec<String>,
}

/// Validates `S` and `b` and builds the involution.
#[allow(clippy::needless_range_loop)]
pub fn make_involution(matrix: Vec<Vec<Rational>>, offset: Vec<Rational>) -> Result<AffineInvolution, SymmetryError> {
    let n = matrix.len();
    if offset.len() != n {
        return Err(SymmetryError::DimensionMismatch { expected: n, found: offset.len() });
    }
    if let Some(row) = matrix.iter().find(|r| r.len() != n) {
        return Err(SymmetryError::DimensionMismatch { expected: n, found: row.len() });
    }
    for i in 0..n {
        for j in 0..n {
            let mut s = Rational::zero();
            for k in 0..n {
                s += &matrix[i][k] * &matrix[k][j];
            }
            let expect = if i == j { Rational::one() } else { Rational::zero() };
            if s != expect {
                return Err(SymmetryError::NotAnInvolution(format!(
                    "(S^2)[{i}][{j}] = {} but the identity requires {}",
                    rational_to_string(&s),
                    rational_to_string(&expect)
                )));
            }
        }
        let mut sb = offset[i].clone();
        for k in 0..n {
            sb += &matrix[i][k] * &offset[k];
        }
        if !sb.is_zero() {
            return Err(SymmetryError::NotAnInvolution(format!(
                "(S b + b)[{i}] = {} is nonzero",
                rational_to_string(&sb)
            )));
        }
    }
    let matrix_f64 = matrix.iter().map(|r| r.iter().map(rational_to_f64).collect()).collect();
    let offset_f64 = offset.iter().map(rational_to_f64).collect();
    Ok(AffineInvolution { matrix, offset, matrix_f64, offset_f64 })
}

fn diag(entries: Vec<Rational>) -> Vec<Vec<Rational>> {
    let n = entries.len();
    entries
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            let mut row = vec![Rational::zero(); n];
            row[i] = d;
            row
        })
        .collect()
}

impl AffineInvolution {
    /// Mirror flipping the sign of coordinate `axis`; `reflect_axis(2, 0)` is
    /// `(x, y) -> (-x, y)`.
    pub fn reflect_axis(dim: usize, axis: usize) -> Self {
        let entries = (0..dim).map(|i| if i == axis { -Rational::one() } else { Rational::one() }).collect();
        make_involution(diag(entries), vec![Rational::zero(); dim]).expect("axis reflection is an involution")
    }

    /// `z -> -z`.
    pub fn point_reflection(dim: usize) -> Self {
        make_involution(diag(vec![-Rational::one(); dim]), vec![Rational::zero(); dim])
            .expect("point reflection is an involution")
    }

    /// Exchanges coordinates `i` and `j`.
    pub fn swap(dim: usize, i: usize, j: usize) -> Self {
        let mut m = diag(vec![Rational::one(); dim]);
        m[i][i] = Rational::zero();
        m[j][j] = Rational::zero();
        m[i][j] = Rational::one();
        m[j][i] = Rational::one();
        make_involution(m, vec![Rational::zero(); dim]).expect("coordinate swap is an involution")
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    pub fn offset(&self) -> &[Rational] {
        &self.offset
    }

    pub fn apply_exact(&self, z: &[Rational]) -> Vec<Rational> {
        self.matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, b)| row.iter().zip(z).fold(b.clone(), |acc, (s, x)| acc + s * x))
            .collect()
    }

    /// `S · v` for a vector of polynomials.
    pub fn linear_part_on(&self, v: &[Poly]) -> Vec<Poly> {
        let nv = v.first().map(Poly::nvars).unwrap_or(0);
        self.matrix
            .iter()
            .map(|row| {
                row.iter().zip(v).fold(Poly::zero(nv), |acc, (s, p)| if s.is_zero() { acc } else { acc + p.scale(s) })
            })
            .collect()
    }

    pub fn to_literal(&self) -> InvolutionLiteral {
        InvolutionLiteral {
            matrix: self.matrix.iter().map(|r| r.iter().map(rational_to_string).collect()).collect(),
            b: self.offset.iter().map(rational_to_string).collect(),
        }
    }

    pub fn from_literal(lit: &InvolutionLiteral) -> Result<Self, SymmetryError> {
        let matrix = lit
            .matrix
            .iter()
            .map(|r| r.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let offset = lit.b.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>()?;
        make_involution(matrix, offset)
    }
}

impl Involution for AffineInvolution {
    fn dim(&self) -> usize {
        self.offset.len()
    }

    fn apply(&self, z: &[f64]) -> Vec<f64> {
        self.matrix_f64
            .iter()
            .zip(&self.offset_f64)
            .map(|(row, b)| row.iter().zip(z).fold(*b, |acc, (s, x)| acc + s * x))
            .collect()
    }
}

impl fmt::Display for AffineInvolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lit = self.to_literal();
        write!(f, "S={:?} b={:?}", lit.matrix, lit.b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetryKind {
    Reversible,
    Symmetric,
    Neither,
}

impl fmt::Display for SymmetryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymmetryKind::Reversible => "reversible",
            SymmetryKind::Symmetric => "symmetric",
            SymmetryKind::Neither => "neither",
        })
    }
}

/// Outcome of a reversibility or symmetry test. `residuals[i]` is the
/// defect polynomial of component `i`; the condition holds iff all vanish.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryReport {
    pub kind: SymmetryKind,
    pub residuals: Vec<Poly>,
}

impl SymmetryReport {
    pub fn holds(&self) -> bool {
        self.residuals.iter().all(Poly::is_zero)
    }

    /// Indices and polynomials of the nonzero residual components.
    pub fn failing(&self) -> impl Iterator<Item = (usize, &Poly)> {
        self.residuals.iter().enumerate().filter(|(_, r)| !r.is_zero())
    }
}

/// A scalar polynomial identity that either holds or leaves a residual.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactCheck {
    pub holds: bool,
    pub residual: Poly,
}

impl ExactCheck {
    fn from_residual(residual: Poly) -> Self {
        ExactCheck { holds: residual.is_zero(), residual }
    }
}

fn check_dims(field: &[Poly], sigma: &AffineInvolution) -> Result<(), SymmetryError> {
    let n = sigma.dim();
    if field.len() != n {
        return Err(SymmetryError::DimensionMismatch { expected: n, found: field.len() });
    }
    if let Some(p) = field.iter().find(|p| p.nvars() != n) {
        return Err(SymmetryError::DimensionMismatch { expected: n, found: p.nvars() });
    }
    Ok(())
}

fn residuals(field: &[Poly], sigma: &AffineInvolution, sign: i8) -> Result<Vec<Poly>, SymmetryError> {
    check_dims(field, sigma)?;
    let pulled = field.iter().map(|p| p.compose_affine(sigma)).collect::<Result<Vec<_>, _>>()?;
    let sv = sigma.linear_part_on(field);
    Ok(pulled.into_iter().zip(sv).map(|(a, b)| if sign > 0 { a + b } else { a - b }).collect())
}

/// Residuals `(V∘σ)_i + (S V)_i`.
pub fn check_reversible(field: &[Poly], sigma: &AffineInvolution) -> Result<SymmetryReport, SymmetryError> {
    let residuals = residuals(field, sigma, 1)?;
    let kind = if residuals.iter().all(Poly::is_zero) { SymmetryKind::Reversible } else { SymmetryKind::Neither };
    Ok(SymmetryReport { kind, residuals })
}

/// Residuals `(V∘σ)_i - (S V)_i`.
pub fn check_symmetric(field: &[Poly], sigma: &AffineInvolution) -> Result<SymmetryReport, SymmetryError> {
    let residuals = residuals(field, sigma, -1)?;
    let kind = if residuals.iter().all(Poly::is_zero) { SymmetryKind::Symmetric } else { SymmetryKind::Neither };
    Ok(SymmetryReport { kind, residuals })
}

/// Tries reversibility, then symmetry; if neither holds the reversibility
/// residuals are returned.
pub fn classify(field: &[Poly], sigma: &AffineInvolution) -> Result<SymmetryReport, SymmetryError> {
    let rev = check_reversible(field, sigma)?;
    if rev.holds() {
        return Ok(rev);
    }
    let sym = check_symmetric(field, sigma)?;
    if sym.holds() {
        return Ok(sym);
    }
    Ok(rev)
}

/// Runs the check matching `declared`; `Neither` falls back to [`classify`].
pub fn check_declared(
    field: &[Poly],
    sigma: &AffineInvolution,
    declared: SymmetryKind,
) -> Result<SymmetryReport, SymmetryError> {
    match declared {
        SymmetryKind::Reversible => check_reversible(field, sigma),
        SymmetryKind::Symmetric => check_symmetric(field, sigma),
        SymmetryKind::Neither => classify(field, sigma),
    }
}

/// `δ∘σ + δ == 0`.
pub fn is_sigma_odd(delta: &Poly, sigma: &AffineInvolution) -> Result<ExactCheck, SymmetryError> {
    if delta.nvars() != sigma.dim() {
        return Err(SymmetryError::DimensionMismatch { expected: sigma.dim(), found: delta.nvars() });
    }
    Ok(ExactCheck::from_residual(delta.compose_affine(sigma)? + delta))
}

/// Cross-multiplied oddness for a rational `δ = N/D`:
/// `(N∘σ) D + N (D∘σ) == 0`.
pub fn is_sigma_odd_rational(delta: &RationalFn, sigma: &AffineInvolution) -> Result<ExactCheck, SymmetryError> {
    let s = delta.compose_affine(sigma)?;
    Ok(ExactCheck::from_residual(s.num() * delta.den() + delta.num() * s.den()))
}

/// `q - q∘σ`, always σ-odd.
pub fn odd_part(q: &Poly, sigma: &AffineInvolution) -> Result<Poly, SymmetryError> {
    Ok(q - q.compose_affine(sigma)?)
}

/// With `α = P/Q`, the compatibility identity `α + α∘σ = 2 α (α∘σ)` cleared
/// of denominators: `P (Q∘σ) + (P∘σ) Q - 2 P (P∘σ) == 0`.
pub fn check_compatible(alpha: &RationalFn, sigma: &AffineInvolution) -> Result<ExactCheck, SymmetryError> {
    if alpha.nvars() != sigma.dim() {
        return Err(SymmetryError::DimensionMismatch { expected: sigma.dim(), found: alpha.nvars() });
    }
    let p = alpha.num();
    let q = alpha.den();
    let ps = p.compose_affine(sigma)?;
    let qs = q.compose_affine(sigma)?;
    let two = crate::polycore::integer(2);
    let residual = p * &qs + &ps * q - (p * &ps).scale(&two);
    Ok(ExactCheck::from_residual(residual))
}

/// `α = 1 / (1 + δ)`.
pub fn alpha_from_delta(delta: &Poly) -> RationalFn {
    let n = delta.nvars();
    RationalFn::new(Poly::one(n), Poly::one(n) + delta).unwrap_or_else(|_| {
        // 1 + δ is the zero polynomial only for δ = -1; keep the structure
        // but make the failure visible at evaluation time instead.
        RationalFn::from_poly(Poly::zero(n))
    })
}

/// `δ = 1/α - 1 = (Q - P) / P` for `α = P/Q`.
pub fn delta_from_alpha(alpha: &RationalFn) -> Result<RationalFn, SymmetryError> {
    if alpha.num().is_zero() {
        return Err(SymmetryError::ZeroAlpha);
    }
    Ok(RationalFn::new(alpha.den() - alpha.num(), alpha.num().clone())?)
}

/// Affine subspace `offset + span(basis)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedSet {
    pub offset: Vec<Rational>,
    pub basis: Vec<Vec<Rational>>,
}

impl FixedSet {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn point(&self, coords: &[Rational]) -> Vec<Rational> {
        let mut z = self.offset.clone();
        for (c, v) in coords.iter().zip(&self.basis) {
            for (zi, vi) in z.iter_mut().zip(v) {
                *zi += c * vi;
            }
        }
        z
    }

    pub fn contains(&self, sigma: &AffineInvolution, z: &[Rational]) -> bool {
        sigma.apply_exact(z) == z
    }
}

/// Solves `(S - I) z = -b`: the particular solution is `b/2` and the
/// homogeneous part is the null space of `S - I`.
pub fn fixed_set(sigma: &AffineInvolution) -> FixedSet {
    let n = sigma.dim();
    let half = crate::polycore::rational(1, 2);
    let offset = sigma.offset().iter().map(|b| b * &half).collect();
    let mut a: Vec<Vec<Rational>> = sigma
        .matrix()
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter().enumerate().map(|(j, s)| if i == j { s - Rational::one() } else { s.clone() }).collect()
        })
        .collect();
    FixedSet { offset, basis: null_space(&mut a, n) }
}

#[allow(clippy::needless_range_loop)]
fn null_space(a: &mut [Vec<Rational>], n: usize) -> Vec<Vec<Rational>> {
    // reduced row echelon form
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = a[row][col].recip();
        for v in a[row].iter_mut() {
            *v *= &inv;
        }
        for r in 0..a.len() {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..n {
                    let d = &f * &a[row][c];
                    a[r][c] -= d;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![Rational::zero(); n];
            v[fc] = Rational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[r][fc].clone();
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::{integer, rational};

    fn p(s: &str) -> Poly {
        Poly::parse(s, &["x", "y"]).unwrap()
    }

    fn field(a: &str, b: &str) -> Vec<Poly> {
        vec![p(a), p(b)]
    }

    fn ratfn(num: &str, den: &str) -> RationalFn {
        RationalFn::new(p(num), p(den)).unwrap()
    }

    #[test]
    fn make_involution_examples() {
        let m = |a: i64, b: i64, c: i64, d: i64| vec![vec![integer(a), integer(b)], vec![integer(c), integer(d)]];
        assert!(make_involution(m(-1, 0, 0, 1), vec![integer(0), integer(0)]).is_ok());
        assert!(matches!(
            make_involution(m(1, 0, 0, 1), vec![integer(1), integer(0)]),
            Err(SymmetryError::NotAnInvolution(_))
        ));
        assert!(make_involution(m(0, 1, 1, 0), vec![integer(0), integer(0)]).is_ok());
        assert!(matches!(
            make_involution(m(1, 1, 0, 1), vec![integer(0), integer(0)]),
            Err(SymmetryError::NotAnInvolution(_))
        ));
        // mirror about x = 1
        assert!(make_involution(m(-1, 0, 0, 1), vec![integer(2), integer(0)]).is_ok());
    }

    #[test]
    fn reversible_examples() {
        let mirror = AffineInvolution::reflect_axis(2, 0);
        assert!(check_reversible(&field("y", "-x"), &mirror).unwrap().holds());
        let r = check_reversible(&field("y*(1-x^2)", "-x*(1-x^2)"), &mirror).unwrap();
        assert_eq!(r.kind, SymmetryKind::Reversible);
        let r = check_reversible(&field("y", "-x - y*(x^2-1)"), &mirror).unwrap();
        assert_eq!(r.kind, SymmetryKind::Neither);
        assert!(r.residuals[0].is_zero());
        assert_eq!(r.residuals[1], p("-2*y*(x^2-1)"));
    }

    #[test]
    fn symmetric_examples() {
        let neg = AffineInvolution::point_reflection(2);
        assert!(check_symmetric(&field("y", "-x - y*(x^2-1)"), &neg).unwrap().holds());
        let r = check_symmetric(&field("y*(1-(x+y)^2)", "-x*(1-(x+y)^2)"), &neg).unwrap();
        assert_eq!(r.kind, SymmetryKind::Symmetric);
        let r = check_symmetric(&field("y", "-x + x^2"), &neg).unwrap();
        assert_eq!(r.kind, SymmetryKind::Neither);
        assert_eq!(r.residuals[1], p("2*x^2"));
    }

    #[test]
    fn oddness_examples() {
        let mirror = AffineInvolution::reflect_axis(2, 0);
        let neg = AffineInvolution::point_reflection(2);
        assert!(is_sigma_odd(&p("x"), &mirror).unwrap().holds);
        let c = is_sigma_odd(&p("x^2"), &mirror).unwrap();
        assert!(!c.holds);
        assert_eq!(c.residual, p("2*x^2"));
        assert!(is_sigma_odd(&p("x + y"), &neg).unwrap().holds);
    }

    #[test]
    fn compatibility_examples() {
        let mirror = AffineInvolution::reflect_axis(2, 0);
        assert!(check_compatible(&ratfn("1", "1 + x"), &mirror).unwrap().holds);
        assert!(check_compatible(&ratfn("1", "1"), &mirror).unwrap().holds);
        let c = check_compatible(&ratfn("1", "1 + x^2"), &mirror).unwrap();
        assert!(!c.holds);
        // 2(1 + x^2) - 2 = 2x^2
        assert_eq!(c.residual, p("2*x^2"));
    }

    #[test]
    fn alpha_delta_conversions() {
        let a = alpha_from_delta(&p("x"));
        assert!(a.cross_eq(&ratfn("1", "1 + x")));
        assert!(alpha_from_delta(&Poly::zero(2)).cross_eq(&ratfn("1", "1")));
        assert!(alpha_from_delta(&p("x + y")).cross_eq(&ratfn("1", "1 + x + y")));

        assert!(delta_from_alpha(&ratfn("1", "1 + x")).unwrap().cross_eq(&ratfn("x", "1")));
        assert!(delta_from_alpha(&ratfn("1", "1")).unwrap().cross_eq(&ratfn("0", "1")));
        assert!(delta_from_alpha(&ratfn("2", "1")).unwrap().cross_eq(&ratfn("-1", "2")));
        assert_eq!(delta_from_alpha(&ratfn("0", "1")).unwrap_err(), SymmetryError::ZeroAlpha);
    }

    #[test]
    fn fixed_set_examples() {
        let mirror = fixed_set(&AffineInvolution::reflect_axis(2, 0));
        assert_eq!(mirror.dimension(), 1);
        assert_eq!(mirror.basis[0], vec![integer(0), integer(1)]);
        let origin = fixed_set(&AffineInvolution::point_reflection(2));
        assert_eq!(origin.dimension(), 0);
        assert_eq!(origin.offset, vec![integer(0), integer(0)]);
        let swap = AffineInvolution::swap(2, 0, 1);
        let diag = fixed_set(&swap);
        assert_eq!(diag.dimension(), 1);
        let z = diag.point(&[rational(3, 7)]);
        assert_eq!(z[0], z[1]);
        assert!(diag.contains(&swap, &z));
        let shifted = make_involution(
            vec![vec![integer(-1), integer(0)], vec![integer(0), integer(1)]],
            vec![integer(2), integer(0)],
        )
        .unwrap();
        let line = fixed_set(&shifted);
        assert_eq!(line.offset, vec![integer(1), integer(0)]);
        assert!(line.contains(&shifted, &line.point(&[integer(5)])));
    }

    #[test]
    fn literal_round_trip() {
        let s = AffineInvolution::swap(2, 0, 1);
        let json = serde_json::to_string(&s.to_literal()).unwrap();
        assert_eq!(json, r#"{"S":[["0","1"],["1","0"]],"b":["0","0"]}"#);
        let back: InvolutionLiteral = serde_json::from_str(&json).unwrap();
        assert_eq!(AffineInvolution::from_literal(&back).unwrap(), s);
    }
}
