//! System pairs `(V, αV)`, their hypotheses, and period-function comparison.

use std::fmt::{self, Write as _};

use rayon::prelude::*;
use thiserror::Error;

use crate::cycles::{
    measure_period, orbit_distance, verify_sigma_invariance, CycleOptions, CycleRecord, PeriodStatus, Ray,
};
use crate::flow::{EvaluableField, FlowError};
use crate::polycore::{Poly, PolyError, RationalFn};
use crate::symmetry::{
    alpha_from_delta, check_compatible, check_declared, classify, is_sigma_odd, AffineInvolution, ExactCheck,
    Involution, SymmetryError, SymmetryKind, SymmetryReport,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquivError {
    #[error("delta is not sigma-odd (residual {residual})")]
    NotSigmaOdd { residual: Poly },
    #[error("explicit scaled field differs from alpha*V in component {component}")]
    ScaledMismatch { component: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Hypotheses of the period-equality theorems, recomputed from the pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypotheses {
    pub declared: SymmetryKind,
    pub symmetry: SymmetryReport,
    pub compatibility: ExactCheck,
    /// Present when the pair was built from `δ`.
    pub delta_odd: Option<ExactCheck>,
}

impl Hypotheses {
    pub fn holds(&self) -> bool {
        self.declared != SymmetryKind::Neither
            && self.symmetry.holds()
            && self.compatibility.holds
            && self.delta_odd.as_ref().is_none_or(|c| c.holds)
    }
}

#[derive(Clone, Debug)]
pub struct SystemPair {
    pub base: Vec<Poly>,
    pub alpha: RationalFn,
    pub delta: Option<Poly>,
    /// Scaled field `αV` as `scaled_num_i / scaled_den`.
    pub scaled_num: Vec<Poly>,
    pub scaled_den: Poly,
    pub sigma: AffineInvolution,
    pub hypotheses: Hypotheses,
}

fn check_dims(v: &[Poly], sigma: &AffineInvolution) -> Result<usize, EquivError> {
    let n = sigma.dim();
    if v.len() != n {
        return Err(EquivError::DimensionMismatch { expected: n, found: v.len() });
    }
    if let Some(p) = v.iter().find(|p| p.nvars() != n) {
        return Err(EquivError::DimensionMismatch { expected: n, found: p.nvars() });
    }
    Ok(n)
}

/// Pairs `V` with `αV`. The kind is classified from `V`; hypothesis
/// failures are recorded, not rejected.
pub fn make_pair(v: &[Poly], alpha: &RationalFn, sigma: &AffineInvolution) -> Result<SystemPair, EquivError> {
    let symmetry = classify(v, sigma)?;
    build_pair(v, alpha, None, sigma, symmetry.kind, symmetry)
}

/// Like [`make_pair`] with a declared kind checked against `V`.
pub fn make_declared_pair(
    v: &[Poly],
    alpha: &RationalFn,
    sigma: &AffineInvolution,
    kind: SymmetryKind,
) -> Result<SystemPair, EquivError> {
    let symmetry = check_declared(v, sigma, kind)?;
    build_pair(v, alpha, None, sigma, kind, symmetry)
}

/// Pair built from a σ-odd `δ`: `α = 1/(1+δ)` applied to `V`.
pub fn delta_pair(
    v: &[Poly],
    delta: &Poly,
    sigma: &AffineInvolution,
    kind: SymmetryKind,
) -> Result<SystemPair, EquivError> {
    let symmetry = check_declared(v, sigma, kind)?;
    build_pair(v, &alpha_from_delta(delta), Some(delta.clone()), sigma, kind, symmetry)
}

fn build_pair(
    v: &[Poly],
    alpha: &RationalFn,
    delta: Option<Poly>,
    sigma: &AffineInvolution,
    declared: SymmetryKind,
    symmetry: SymmetryReport,
) -> Result<SystemPair, EquivError> {
    let n = check_dims(v, sigma)?;
    if alpha.nvars() != n {
        return Err(EquivError::DimensionMismatch { expected: n, found: alpha.nvars() });
    }
    let compatibility = check_compatible(alpha, sigma)?;
    let delta_odd = delta.as_ref().map(|d| is_sigma_odd(d, sigma)).transpose()?;
    Ok(SystemPair {
        base: v.to_vec(),
        alpha: alpha.clone(),
        delta,
        scaled_num: v.iter().map(|p| alpha.num() * p).collect(),
        scaled_den: alpha.den().clone(),
        sigma: sigma.clone(),
        hypotheses: Hypotheses { declared, symmetry, compatibility, delta_odd },
    })
}

/// Corollary construction: base `V(δ² - 1)`, scaled `V(δ - 1)`, related by
/// `α = 1/(1+δ)`. The symmetry hypothesis is checked on the base field.
pub fn corollary_pair(
    v: &[Poly],
    delta: &Poly,
    sigma: &AffineInvolution,
    kind: SymmetryKind,
) -> Result<SystemPair, EquivError> {
    let n = check_dims(v, sigma)?;
    if delta.nvars() != n {
        return Err(EquivError::DimensionMismatch { expected: n, found: delta.nvars() });
    }
    let odd = is_sigma_odd(delta, sigma)?;
    if !odd.holds {
        return Err(EquivError::NotSigmaOdd { residual: odd.residual });
    }
    let one = Poly::one(n);
    let sq = &(delta * delta) - &one;
    let lin = delta - &one;
    let base: Vec<Poly> = v.iter().map(|p| p * &sq).collect();
    let scaled: Vec<Poly> = v.iter().map(|p| p * &lin).collect();
    let symmetry = check_declared(&base, sigma, kind)?;
    let pair = build_pair(&base, &alpha_from_delta(delta), Some(delta.clone()), sigma, kind, symmetry)?;
    pair.with_scaled_field(scaled, one)
}

impl SystemPair {
    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn kind(&self) -> SymmetryKind {
        self.hypotheses.declared
    }

    /// Replaces the scaled field by an explicit form `nums / den`, verified
    /// exactly against `α V`.
    pub fn with_scaled_field(mut self, nums: Vec<Poly>, den: Poly) -> Result<Self, EquivError> {
        let n = self.dim();
        if nums.len() != n {
            return Err(EquivError::DimensionMismatch { expected: n, found: nums.len() });
        }
        if den.is_zero() {
            return Err(PolyError::ZeroDenominator.into());
        }
        for (i, (w, v)) in nums.iter().zip(&self.base).enumerate() {
            // w / den == P v / Q
            let lhs = w.checked_mul(self.alpha.den())?;
            let rhs = self.alpha.num().checked_mul(v)?.checked_mul(&den)?;
            if lhs != rhs {
                return Err(EquivError::ScaledMismatch { component: i });
            }
        }
        self.scaled_num = nums;
        self.scaled_den = den;
        Ok(self)
    }

    pub fn base_field(&self) -> Result<EvaluableField, EquivError> {
        Ok(EvaluableField::polynomial(&self.base)?)
    }

    pub fn scaled_field(&self) -> Result<EvaluableField, EquivError> {
        if self.scaled_den.degree() == Some(0) {
            let inv = self.scaled_den.terms().next().map(|(_, c)| c.recip()).expect("nonzero constant");
            let nums: Vec<Poly> = self.scaled_num.iter().map(|p| p.scale(&inv)).collect();
            return Ok(EvaluableField::polynomial(&nums)?);
        }
        Ok(EvaluableField::rational(&self.scaled_num, &self.scaled_den)?)
    }

    /// The scaler used for per-cycle guards: `δ` when known, else `α`.
    pub fn scaler(&self) -> Scaler {
        match &self.delta {
            Some(d) => Scaler::Delta(d.clone()),
            None => Scaler::Alpha(self.alpha.clone()),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Scaler {
    Alpha(RationalFn),
    Delta(Poly),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GuardReport {
    pub ok: bool,
    /// `min (1 + δ)` over the orbit samples, with `1 + δ = 1/α`.
    pub min_one_plus_delta: f64,
    pub constant_sign: bool,
}

const GUARD_FLOOR: f64 = 1e-9;
const GUARD_SAMPLES: usize = 2048;

/// Checks `1 + δ > 0` (equivalently `α > 0`) along the cycle.
pub fn guard_cycle(cycle: &CycleRecord, scaler: &Scaler) -> GuardReport {
    let eval = |z: &[f64]| -> f64 {
        match scaler {
            Scaler::Delta(d) => 1.0 + d.eval(z).unwrap_or(f64::NAN),
            Scaler::Alpha(a) => {
                let (p, q) = (a.num().eval(z).unwrap_or(f64::NAN), a.den().eval(z).unwrap_or(f64::NAN));
                if p == 0.0 || q == 0.0 {
                    f64::NAN
                } else {
                    q / p
                }
            }
        }
    };
    let mut min = f64::INFINITY;
    let mut pos = false;
    let mut neg = false;
    let mut bad = false;
    for z in cycle.samples(GUARD_SAMPLES).iter().chain(std::iter::once(&cycle.anchor)) {
        let v = eval(z);
        if !v.is_finite() {
            bad = true;
            continue;
        }
        min = min.min(v);
        pos |= v > 0.0;
        neg |= v < 0.0;
    }
    let constant_sign = !bad && !(pos && neg);
    GuardReport {
        ok: constant_sign && min > GUARD_FLOOR,
        min_one_plus_delta: if bad { f64::NAN } else { min },
        constant_sign,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GuardStatus {
    Ok,
    Violation,
    NotChecked,
}

impl GuardStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            GuardStatus::Ok => "ok",
            GuardStatus::Violation => "violation",
            GuardStatus::NotChecked => "n/a",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvariantStatus {
    Yes,
    No,
    NotChecked,
}

impl InvariantStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            InvariantStatus::Yes => "yes",
            InvariantStatus::No => "no",
            InvariantStatus::NotChecked => "n/a",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ComparisonRow {
    pub r: f64,
    pub point: Vec<f64>,
    pub t_base: f64,
    pub t_scaled: f64,
    pub abs_dt: f64,
    /// `|ΔT| / T_base`.
    pub rel_dt: f64,
    pub guard: GuardStatus,
    pub invariant: InvariantStatus,
    pub base_status: PeriodStatus,
    pub scaled_status: PeriodStatus,
    /// Hausdorff-style distance between the two measured orbits.
    pub orbit_defect: Option<f64>,
}

impl ComparisonRow {
    pub fn measured(&self) -> bool {
        self.base_status == PeriodStatus::Ok && self.scaled_status == PeriodStatus::Ok
    }

    /// Whether the row counts towards the summary maximum.
    pub fn eligible(&self) -> bool {
        self.measured() && self.guard != GuardStatus::Violation && self.invariant != InvariantStatus::No
    }
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub label: String,
    pub rows: Vec<ComparisonRow>,
    /// Pair-level hypotheses; `None` for plain field-to-field comparisons.
    pub hypotheses: Option<Hypotheses>,
}

pub const CSV_HEADER: &str = "r,T_base,T_scaled,abs_dT,rel_dT,guard,invariant";

impl ComparisonReport {
    /// Largest relative difference over eligible rows.
    pub fn max_rel_dt(&self) -> Option<f64> {
        self.rows.iter().filter(|r| r.eligible()).map(|r| r.rel_dt).reduce(f64::max)
    }

    /// Period equality within `threshold` on every eligible row (and at
    /// least one such row).
    pub fn periods_agree(&self, threshold: f64) -> bool {
        self.max_rel_dt().is_some_and(|m| m <= threshold)
    }

    pub fn hypotheses_hold(&self) -> bool {
        self.hypotheses.as_ref().is_none_or(Hypotheses::holds)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                format_sig(r.r),
                format_sig(r.t_base),
                format_sig(r.t_scaled),
                format_sig(r.abs_dt),
                format_sig(r.rel_dt),
                r.guard.as_str(),
                r.invariant.as_str()
            );
        }
        out
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let eligible = self.rows.iter().filter(|r| r.eligible()).count();
        write!(f, "{}: {} rows, {} eligible, max rel dT = ", self.label, self.rows.len(), eligible)?;
        match self.max_rel_dt() {
            Some(m) => f.write_str(&format_sig(m))?,
            None => f.write_str("n/a")?,
        }
        if let Some(h) = &self.hypotheses {
            write!(
                f,
                ", {} {}, alpha {}",
                h.declared,
                if h.symmetry.holds() { "verified" } else { "FAILED" },
                if h.compatibility.holds { "compatible" } else { "NOT compatible" }
            )?;
        }
        Ok(())
    }
}

/// Formats with 15 significant digits; trailing zeros are dropped.
pub fn format_sig(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..15).contains(&e) {
        let decimals = (14 - e).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.14e}");
        let (mantissa, exp) = s.split_once('e').expect("scientific format");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exp}")
    }
}

fn nan_row(r: f64, point: Vec<f64>, base_status: PeriodStatus) -> ComparisonRow {
    ComparisonRow {
        r,
        point,
        t_base: f64::NAN,
        t_scaled: f64::NAN,
        abs_dt: f64::NAN,
        rel_dt: f64::NAN,
        guard: GuardStatus::NotChecked,
        invariant: InvariantStatus::NotChecked,
        base_status,
        scaled_status: PeriodStatus::Failed,
        orbit_defect: None,
    }
}

const ORBIT_SAMPLES: usize = 32;

fn compare_rows(
    base: &EvaluableField,
    scaled: &EvaluableField,
    scaler: Option<&Scaler>,
    sigma: Option<&dyn Involution>,
    ray: &Ray,
    radii: &[f64],
    opts: &CycleOptions,
) -> Vec<ComparisonRow> {
    radii
        .par_iter()
        .map(|&r| {
            let point = ray.point(r);
            let cb = match measure_period(base, &point, opts) {
                Ok(c) => c,
                Err(e) => return nan_row(r, point, PeriodStatus::from_error(&e)),
            };
            let guard = match scaler {
                Some(s) if guard_cycle(&cb, s).ok => GuardStatus::Ok,
                Some(_) => GuardStatus::Violation,
                None => GuardStatus::NotChecked,
            };
            let invariant = match sigma {
                Some(s) if verify_sigma_invariance(&cb, s).holds => InvariantStatus::Yes,
                Some(_) => InvariantStatus::No,
                None => InvariantStatus::NotChecked,
            };
            let (t_scaled, scaled_status, orbit_defect) = match measure_period(scaled, &point, opts) {
                Ok(cs) => (cs.period, PeriodStatus::Ok, Some(orbit_distance(&cb, &cs, ORBIT_SAMPLES))),
                Err(e) => (f64::NAN, PeriodStatus::from_error(&e), None),
            };
            let abs_dt = (t_scaled - cb.period).abs();
            ComparisonRow {
                r,
                point,
                t_base: cb.period,
                t_scaled,
                abs_dt,
                rel_dt: abs_dt / cb.period,
                guard,
                invariant,
                base_status: PeriodStatus::Ok,
                scaled_status,
                orbit_defect,
            }
        })
        .collect()
}

/// Measures both periods of the pair at each radius, with per-cycle guard
/// and σ-invariance checks on the base cycle.
pub fn compare_periods(
    pair: &SystemPair,
    ray: &Ray,
    radii: &[f64],
    opts: &CycleOptions,
) -> Result<ComparisonReport, EquivError> {
    let base = pair.base_field()?;
    let scaled = pair.scaled_field()?;
    let scaler = pair.scaler();
    let rows = compare_rows(&base, &scaled, Some(&scaler), Some(&pair.sigma), ray, radii, opts);
    Ok(ComparisonReport { label: "pair".into(), rows, hypotheses: Some(pair.hypotheses.clone()) })
}

/// Compares the period functions of two arbitrary fields, without
/// hypothesis or guard checks.
pub fn compare_fields(
    label: &str,
    base: &EvaluableField,
    other: &EvaluableField,
    ray: &Ray,
    radii: &[f64],
    opts: &CycleOptions,
) -> ComparisonReport {
    ComparisonReport {
        label: label.to_string(),
        rows: compare_rows(base, other, None, None, ray, radii, opts),
        hypotheses: None,
    }
}

/// Reduces `V` once per `(σ_i, δ_i)` with `α_i = 1/(1+δ_i)`, compares each
/// reduction with `V`, then every two reductions with each other.
pub fn double_reversibility_suite(
    v: &[Poly],
    sigmas: &[AffineInvolution],
    deltas: &[Poly],
    ray: &Ray,
    radii: &[f64],
    opts: &CycleOptions,
) -> Result<Vec<ComparisonReport>, EquivError> {
    if sigmas.len() != deltas.len() {
        return Err(EquivError::DimensionMismatch { expected: sigmas.len(), found: deltas.len() });
    }
    let mut reports = Vec::new();
    let mut reduced = Vec::new();
    for (i, (s, d)) in sigmas.iter().zip(deltas).enumerate() {
        let pair = delta_pair(v, d, s, SymmetryKind::Reversible)?;
        let mut rep = compare_periods(&pair, ray, radii, opts)?;
        rep.label = format!("reduction {}", i + 1);
        reduced.push(pair.scaled_field()?);
        reports.push(rep);
    }
    for i in 0..reduced.len() {
        for j in i + 1..reduced.len() {
            let label = format!("reduction {} vs reduction {}", i + 1, j + 1);
            reports.push(compare_fields(&label, &reduced[i], &reduced[j], ray, radii, opts));
        }
    }
    Ok(reports)
}
