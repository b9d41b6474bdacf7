//! Periodic orbits: minimal-period measurement, period-function sweeps,
//! limit cycles through a planar return map, and the geometric checks on
//! σ-invariant cycles (fixed points of σ on reversible cycles, half-period
//! map on symmetric cycles).

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::flow::{
    integrate_until, locate_crossing, Crossing, Direction, EvaluableField, FlowError, FlowOptions, Trajectory,
};
use crate::numeric::{distance, golden_min, norm};
use crate::symmetry::Involution;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CycleError {
    #[error("anchor is (numerically) a critical point: |W(z0)| = {speed:e}")]
    CriticalPoint { speed: f64 },
    #[error("no closing return after {crossings} section crossings (t = {elapsed})")]
    NoReturn { crossings: usize, elapsed: f64 },
    #[error("domain guard violated at {point:?}")]
    GuardViolation { point: Vec<f64> },
    #[error("return map has no isolated fixed point after {iterations} iterations (classification: {classification})")]
    NoConvergence { iterations: usize, classification: CycleClass },
    #[error("no σ-fixed points on the cycle")]
    NotFound,
    #[error("flow is tangent to the section at {point:?}")]
    NotTransverse { point: Vec<f64> },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Flow(FlowError),
}

impl From<FlowError> for CycleError {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::GuardViolation { point, .. } => CycleError::GuardViolation { point },
            other => CycleError::Flow(other),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleClass {
    CenterAnnulus,
    LimitCycle,
    Unknown,
}

impl fmt::Display for CycleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CycleClass::CenterAnnulus => "center-annulus",
            CycleClass::LimitCycle => "limit-cycle",
            CycleClass::Unknown => "unknown",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CycleOptions {
    pub flow: FlowOptions,
    /// Relative closure tolerance; the absolute tolerance at anchor `z0` is
    /// `cycle_tol * (1 + |z0|)`.
    pub cycle_tol: f64,
    /// Same-orientation crossings examined after the first one before giving up.
    pub extra_crossings: usize,
    /// Anchors with `|W(z0)|` below this are rejected as critical points.
    pub critical_threshold: f64,
}

impl Default for CycleOptions {
    fn default() -> Self {
        CycleOptions { flow: FlowOptions::default(), cycle_tol: 1e-8, extra_crossings: 8, critical_threshold: 1e-12 }
    }
}

impl CycleOptions {
    pub fn tolerance_at(&self, z0: &[f64]) -> f64 {
        self.cycle_tol * (1.0 + norm(z0))
    }
}

#[derive(Clone, Debug)]
pub struct CycleRecord {
    pub anchor: Vec<f64>,
    pub period: f64,
    /// Covers at least `[0, period]`; integrated with the reversed field when
    /// `time_reversed` is set.
    pub trajectory: Trajectory,
    /// Set for repelling limit cycles, which are measured backwards in time.
    pub time_reversed: bool,
    pub closure_defect: f64,
    pub classification: CycleClass,
    /// Absolute cycle tolerance used for closure and geometric checks.
    pub tolerance: f64,
}

impl CycleRecord {
    /// `φ(t, anchor)` with `t` taken modulo the period.
    pub fn state_at(&self, t: f64) -> Vec<f64> {
        let mut tt = t.rem_euclid(self.period);
        if self.time_reversed && tt > 0.0 {
            tt = self.period - tt;
        }
        self.trajectory.flow_at(tt).expect("trajectory covers one period")
    }

    /// `n` states at times `k T / n`, `k = 0..n`.
    pub fn samples(&self, n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|k| self.state_at(self.period * k as f64 / n as f64)).collect()
    }

    /// Largest `|z_i|` over the orbit, for each coordinate.
    pub fn amplitude(&self) -> Vec<f64> {
        let mut amp = vec![0.0f64; self.anchor.len()];
        for z in self.samples(2048) {
            for (a, x) in amp.iter_mut().zip(&z) {
                *a = a.max(x.abs());
            }
        }
        amp
    }

    /// Golden-section minimum of `f(φ(t))` on `[t_lo, t_hi]`.
    fn refine_min<F>(&self, f: &F, t_lo: f64, t_hi: f64) -> (f64, f64)
    where
        F: Fn(&[f64]) -> f64,
    {
        golden_min(|t| f(&self.state_at(t)), t_lo, t_hi, 200)
    }

    fn scan<F>(&self, f: &F, n: usize) -> Vec<f64>
    where
        F: Fn(&[f64]) -> f64,
    {
        (0..n).map(|k| f(&self.state_at(self.period * k as f64 / n as f64))).collect()
    }

    /// Time and distance of the orbit point closest to `p`.
    pub fn nearest(&self, p: &[f64]) -> (f64, f64) {
        let n = 1024;
        let dt = self.period / n as f64;
        let d = |z: &[f64]| distance(z, p);
        let vals = self.scan(&d, n);
        let k = vals.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(k, _)| k).unwrap();
        let tk = k as f64 * dt;
        let (t, v) = self.refine_min(&d, tk - dt, tk + dt);
        (t.rem_euclid(self.period), v)
    }
}

/// Flux-oriented hyperplane through `z0` orthogonal to `W(z0)`.
fn anchor_section(w0: &[f64], z0: &[f64]) -> impl Fn(&[f64]) -> f64 {
    let speed = norm(w0);
    let n: Vec<f64> = w0.iter().map(|w| w / speed).collect();
    let z0 = z0.to_vec();
    move |z: &[f64]| n.iter().zip(z).zip(&z0).map(|((a, x), o)| a * (x - o)).sum()
}

/// Integrates from `z0` and examines crossings of `section` in `direction`,
/// stopping when `accept` returns true or after `max_crossings` crossings.
/// Orbits leaving a ball this many times larger than the start scale are
/// treated as unbounded.
const ESCAPE_FACTOR: f64 = 1e6;

fn run_to_crossing<S, A>(
    field: &EvaluableField,
    z0: &[f64],
    section: &S,
    direction: Direction,
    flow: &FlowOptions,
    max_crossings: usize,
    mut accept: A,
) -> Result<(Trajectory, Option<Crossing>, usize), CycleError>
where
    S: Fn(&[f64]) -> f64,
    A: FnMut(&Crossing) -> bool,
{
    let mut t_search = 0.0;
    let mut count = 0;
    let mut hit: Option<Crossing> = None;
    let mut invalid: Option<Vec<f64>> = None;
    let mut escaped = false;
    let escape = ESCAPE_FACTOR * (1.0 + norm(z0));
    let traj = integrate_until(field, z0, flow, |tr| loop {
        if tr.segments().last().is_some_and(|s| norm(&s.y1) > escape) {
            escaped = true;
            return true;
        }
        match locate_crossing(tr, section, direction, t_search) {
            Ok(c) => {
                count += 1;
                if !field.is_valid_at(&c.z) {
                    invalid = Some(c.z);
                    return true;
                }
                if accept(&c) {
                    hit = Some(c);
                    return true;
                }
                if count >= max_crossings {
                    return true;
                }
                t_search = tr.segments().iter().rev().find(|s| s.t0 <= c.t).map_or(c.t, |s| s.t1);
            }
            Err(_) => {
                t_search = tr.t_end();
                return false;
            }
        }
    })?;
    if let Some(point) = invalid {
        return Err(CycleError::GuardViolation { point });
    }
    if escaped && hit.is_none() {
        return Err(CycleError::NoReturn { crossings: count, elapsed: traj.t_end() });
    }
    Ok((traj, hit, count))
}

/// Measures the minimal period of the cycle through `z0`.
///
/// The section is the hyperplane through `z0` orthogonal to `W(z0)`; the
/// period is the first same-orientation return whose state is within the
/// cycle tolerance of `z0`.
pub fn measure_period(field: &EvaluableField, z0: &[f64], opts: &CycleOptions) -> Result<CycleRecord, CycleError> {
    if z0.len() != field.dim() {
        return Err(CycleError::DimensionMismatch { expected: field.dim(), found: z0.len() });
    }
    let w0 = field.eval(z0)?;
    let speed = norm(&w0);
    if speed < opts.critical_threshold {
        return Err(CycleError::CriticalPoint { speed });
    }
    let section = anchor_section(&w0, z0);
    let tol = opts.tolerance_at(z0);
    let (traj, hit, count) =
        run_to_crossing(field, z0, &section, Direction::Rising, &opts.flow, opts.extra_crossings + 1, |c| {
            distance(&c.z, z0) <= tol
        })?;
    match hit {
        Some(c) => Ok(CycleRecord {
            anchor: z0.to_vec(),
            period: c.t,
            closure_defect: distance(&c.z, z0),
            trajectory: traj,
            time_reversed: false,
            classification: CycleClass::Unknown,
            tolerance: tol,
        }),
        None => Err(CycleError::NoReturn { crossings: count, elapsed: traj.t_end() }),
    }
}

/// Half-line `origin + r * direction` with `direction` normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct Ray {
    origin: Vec<f64>,
    direction: Vec<f64>,
}

impl Ray {
    pub fn new(origin: Vec<f64>, direction: Vec<f64>) -> Result<Self, CycleError> {
        if origin.len() != direction.len() {
            return Err(CycleError::DimensionMismatch { expected: origin.len(), found: direction.len() });
        }
        let len = norm(&direction);
        if !(len > 0.0 && len.is_finite()) {
            return Err(CycleError::NotTransverse { point: origin });
        }
        let direction = direction.iter().map(|d| d / len).collect();
        Ok(Ray { origin, direction })
    }

    pub fn point(&self, r: f64) -> Vec<f64> {
        self.origin.iter().zip(&self.direction).map(|(o, d)| o + r * d).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PeriodStatus {
    Ok,
    GuardViolation,
    NoReturn,
    CriticalPoint,
    Failed,
}

impl PeriodStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            PeriodStatus::Ok => "ok",
            PeriodStatus::GuardViolation => "guard-violation",
            PeriodStatus::NoReturn => "no-return",
            PeriodStatus::CriticalPoint => "critical-point",
            PeriodStatus::Failed => "failed",
        }
    }

    pub fn from_error(e: &CycleError) -> Self {
        match e {
            CycleError::GuardViolation { .. } => PeriodStatus::GuardViolation,
            CycleError::NoReturn { .. } => PeriodStatus::NoReturn,
            CycleError::CriticalPoint { .. } => PeriodStatus::CriticalPoint,
            _ => PeriodStatus::Failed,
        }
    }
}

impl fmt::Display for PeriodStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct PeriodSample {
    pub r: f64,
    pub point: Vec<f64>,
    /// `NaN` unless `status` is `Ok`.
    pub period: f64,
    pub status: PeriodStatus,
    pub closure_defect: Option<f64>,
}

/// Samples `T` at `ray.point(r)` for each radius. Radii are measured
/// independently (and in parallel); failures are recorded per sample.
pub fn period_function(field: &EvaluableField, ray: &Ray, radii: &[f64], opts: &CycleOptions) -> Vec<PeriodSample> {
    radii
        .par_iter()
        .map(|&r| {
            let point = ray.point(r);
            match measure_period(field, &point, opts) {
                Ok(c) => PeriodSample {
                    r,
                    point,
                    period: c.period,
                    status: PeriodStatus::Ok,
                    closure_defect: Some(c.closure_defect),
                },
                Err(e) => PeriodSample {
                    r,
                    point,
                    period: f64::NAN,
                    status: PeriodStatus::from_error(&e),
                    closure_defect: None,
                },
            }
        })
        .collect()
}

/// Line `{z : n·(z - p) = 0}` in the plane, parametrized as `p + u t` with
/// `t = (n_y, -n_x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    point: Vec<f64>,
    normal: Vec<f64>,
    tangent: Vec<f64>,
}

impl Section {
    pub fn new(point: Vec<f64>, normal: Vec<f64>) -> Result<Self, CycleError> {
        if point.len() != 2 || normal.len() != 2 {
            return Err(CycleError::DimensionMismatch { expected: 2, found: point.len().max(normal.len()) });
        }
        let len = norm(&normal);
        if !(len > 0.0 && len.is_finite()) {
            return Err(CycleError::NotTransverse { point });
        }
        let normal: Vec<f64> = normal.iter().map(|v| v / len).collect();
        let tangent = vec![normal[1], -normal[0]];
        Ok(Section { point, normal, tangent })
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        self.normal.iter().zip(z).zip(&self.point).map(|((n, x), p)| n * (x - p)).sum()
    }

    pub fn coordinate(&self, z: &[f64]) -> f64 {
        self.tangent.iter().zip(z).zip(&self.point).map(|((t, x), p)| t * (x - p)).sum()
    }

    pub fn at(&self, u: f64) -> Vec<f64> {
        self.point.iter().zip(&self.tangent).map(|(p, t)| p + u * t).collect()
    }

    fn flux(&self, field: &EvaluableField, z: &[f64]) -> Result<f64, CycleError> {
        let w = field.eval(z)?;
        Ok(self.normal.iter().zip(&w).map(|(n, w)| n * w).sum())
    }
}

const RETURN_TOL: f64 = 1e-10;
const MAX_SECANT: usize = 200;
const ISOLATION_THRESHOLD: f64 = 1e-4;
const MAX_HALVINGS: usize = 40;

/// First return of `section.at(u)` to the section in `direction`.
fn return_map(
    field: &EvaluableField,
    section: &Section,
    u: f64,
    direction: Direction,
    flow: &FlowOptions,
) -> Result<f64, CycleError> {
    let z = section.at(u);
    let s = |z: &[f64]| section.value(z);
    let (traj, hit, count) = run_to_crossing(field, &z, &s, direction, flow, 1, |_| true)?;
    match hit {
        Some(c) => Ok(section.coordinate(&c.z)),
        None => Err(CycleError::NoReturn { crossings: count, elapsed: traj.t_end() }),
    }
}

struct FixedPoint1 {
    u: f64,
    iterations: usize,
    /// Finite-difference slope of the return map at `u`.
    slope: f64,
    /// Whether the two nearby probes also return to themselves.
    neighbours_close: bool,
}

/// Solves `P(u) = u` by secant steps. A step whose orbit does not return is
/// halved back towards the last good iterate.
fn return_map_fixed_point(
    field: &EvaluableField,
    seed: &[f64],
    section: &Section,
    opts: &CycleOptions,
) -> Result<FixedPoint1, CycleError> {
    let s = |z: &[f64]| section.value(z);
    let start = if section.value(seed).abs() <= 1e-12 * (1.0 + norm(seed)) {
        seed.to_vec()
    } else {
        let (traj, hit, count) = run_to_crossing(field, seed, &s, Direction::Either, &opts.flow, 1, |_| true)?;
        hit.ok_or(CycleError::NoReturn { crossings: count, elapsed: traj.t_end() })?.z
    };
    let flux = section.flux(field, &start)?;
    if flux == 0.0 {
        return Err(CycleError::NotTransverse { point: start });
    }
    let direction = if flux > 0.0 { Direction::Rising } else { Direction::Falling };
    let p = |u: f64| return_map(field, section, u, direction, &opts.flow);
    let advance = |u: f64, mut step: f64| -> Result<(f64, f64), CycleError> {
        for _ in 0..MAX_HALVINGS {
            match p(u + step) {
                Ok(v) => return Ok((u + step, v - (u + step))),
                Err(
                    CycleError::NoReturn { .. }
                    | CycleError::GuardViolation { .. }
                    | CycleError::NotTransverse { .. }
                    | CycleError::Flow(_),
                ) => step *= 0.5,
                Err(e) => return Err(e),
            }
        }
        p(u + step).map(|v| (u + step, v - (u + step)))
    };

    let mut u_prev = section.coordinate(&start);
    let mut g_prev = p(u_prev)? - u_prev;
    let mut iterations = 1;
    let u_star = if g_prev.abs() <= RETURN_TOL {
        u_prev
    } else {
        // one plain return before switching to secant steps
        let (mut u, mut g) = advance(u_prev, g_prev)?;
        iterations += 1;
        loop {
            if g.abs() <= RETURN_TOL {
                break u;
            }
            if iterations >= MAX_SECANT {
                return Err(CycleError::NoConvergence { iterations, classification: CycleClass::Unknown });
            }
            let step = if g != g_prev { -g * (u - u_prev) / (g - g_prev) } else { g };
            let (u_next, g_next) = advance(u, step)?;
            u_prev = u;
            g_prev = g;
            u = u_next;
            g = g_next;
            iterations += 1;
        }
    };

    let z_star = section.at(u_star);
    let speed = norm(&field.eval(&z_star)?);
    if speed <= 1e-8 * (1.0 + norm(&z_star)) {
        // converged onto an equilibrium, not a cycle
        return Err(CycleError::CriticalPoint { speed });
    }
    let h = 1e-4 * (1.0 + u_star.abs());
    let (p_plus, p_minus) = (p(u_star + h)?, p(u_star - h)?);
    let tol = opts.tolerance_at(&section.at(u_star));
    Ok(FixedPoint1 {
        u: u_star,
        iterations,
        slope: (p_plus - p_minus) / (2.0 * h),
        neighbours_close: (p_plus - u_star - h).abs() <= tol && (p_minus - u_star + h).abs() <= tol,
    })
}

/// Locates an isolated periodic orbit by solving `P(u) = u` for the planar
/// return map `P` of `section`, starting where the orbit of `seed` meets it.
///
/// Repelling cycles whose outside orbits never return are found through the
/// time-reversed field. A fixed point whose return-map derivative is within
/// `1e-4` of one is not isolated; that case is reported as
/// [`CycleError::NoConvergence`] with the classification of the neighbourhood.
pub fn find_limit_cycle(
    field: &EvaluableField,
    seed: &[f64],
    section: &Section,
    opts: &CycleOptions,
) -> Result<CycleRecord, CycleError> {
    if field.dim() != 2 || seed.len() != 2 {
        return Err(CycleError::DimensionMismatch { expected: 2, found: field.dim().min(seed.len()) });
    }
    let mut reversed = false;
    let fp = match return_map_fixed_point(field, seed, section, opts) {
        Ok(fp) => fp,
        Err(
            e @ (CycleError::NoReturn { .. }
            | CycleError::GuardViolation { .. }
            | CycleError::NoConvergence { .. }
            | CycleError::CriticalPoint { .. }
            | CycleError::Flow(_)),
        ) => {
            reversed = true;
            return_map_fixed_point(&field.reversed(), seed, section, opts).map_err(|_| e)?
        }
        Err(e) => return Err(e),
    };
    if (fp.slope - 1.0).abs() <= ISOLATION_THRESHOLD {
        let classification = if fp.neighbours_close { CycleClass::CenterAnnulus } else { CycleClass::Unknown };
        return Err(CycleError::NoConvergence { iterations: fp.iterations, classification });
    }
    let mut cycle = if reversed {
        measure_period(&field.reversed(), &section.at(fp.u), opts)?
    } else {
        measure_period(field, &section.at(fp.u), opts)?
    };
    cycle.time_reversed = reversed;
    cycle.classification = CycleClass::LimitCycle;
    Ok(cycle)
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceCheck {
    pub holds: bool,
    /// Distance from `σ(anchor)` to the orbit.
    pub defect: f64,
    /// Time at which the orbit passes closest to `σ(anchor)`.
    pub t: f64,
}

/// Whether `σ(γ) = γ`, tested as `min_t |σ(z0) - φ(t, z0)| <= tolerance`.
pub fn verify_sigma_invariance<I: Involution + ?Sized>(cycle: &CycleRecord, sigma: &I) -> InvarianceCheck {
    let target = sigma.apply(&cycle.anchor);
    let (t, defect) = cycle.nearest(&target);
    InvarianceCheck { holds: defect <= cycle.tolerance, defect, t }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPoint {
    pub t: f64,
    pub z: Vec<f64>,
    /// `|σ(z) - z|`.
    pub defect: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointPair {
    pub first: FixedPoint,
    /// `φ(T/2, first.z)`.
    pub second: FixedPoint,
    /// Number of distinct σ-fixed points found on the cycle.
    pub distinct: usize,
}

/// Finds σ-fixed points on a cycle of a σ-reversible system and checks that
/// the half-period flow maps one to another.
pub fn fixed_points_on_cycle<I: Involution + ?Sized>(
    cycle: &CycleRecord,
    sigma: &I,
) -> Result<FixedPointPair, CycleError> {
    let n = 1024;
    let period = cycle.period;
    let dt = period / n as f64;
    let d = |z: &[f64]| distance(&sigma.apply(z), z);
    let vals = cycle.scan(&d, n);
    let tol = cycle.tolerance;

    let mut found: Vec<FixedPoint> = Vec::new();
    for k in 0..n {
        let (l, r) = (vals[(k + n - 1) % n], vals[(k + 1) % n]);
        if !(vals[k] <= l && vals[k] < r) {
            continue;
        }
        let tk = k as f64 * dt;
        let (t, defect) = cycle.refine_min(&d, tk - dt, tk + dt);
        if defect > tol {
            continue;
        }
        let t = t.rem_euclid(period);
        let z = cycle.state_at(t);
        if found.iter().any(|f| distance(&f.z, &z) <= tol) {
            continue;
        }
        found.push(FixedPoint { t, z, defect });
    }
    let first = found.first().cloned().ok_or(CycleError::NotFound)?;
    let t2 = (first.t + 0.5 * period).rem_euclid(period);
    let z2 = cycle.state_at(t2);
    let defect2 = d(&z2);
    if defect2 > tol {
        return Err(CycleError::NotFound);
    }
    Ok(FixedPointPair { second: FixedPoint { t: t2, z: z2, defect: defect2 }, first, distinct: found.len() })
}

/// `max_k |σ(z_k) - φ(T/2, z_k)|` over `samples` evenly spaced orbit points.
pub fn verify_half_period_symmetry<I: Involution + ?Sized>(cycle: &CycleRecord, sigma: &I, samples: usize) -> f64 {
    let half = 0.5 * cycle.period;
    (0..samples)
        .map(|k| {
            let t = cycle.period * k as f64 / samples as f64;
            distance(&sigma.apply(&cycle.state_at(t)), &cycle.state_at(t + half))
        })
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff-style distance between two cycles, from `samples`
/// points on each.
pub fn orbit_distance(a: &CycleRecord, b: &CycleRecord, samples: usize) -> f64 {
    let one_way =
        |x: &CycleRecord, y: &CycleRecord| x.samples(samples).iter().map(|z| y.nearest(z).1).fold(0.0, f64::max);
    one_way(a, b).max(one_way(b, a))
}
