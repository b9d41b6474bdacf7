//! Adaptive integration of `ż = W(z)` with continuous output and section
//! crossing location.
//!
//! The stepper is the Dormand–Prince 5(4) pair with its fourth-order free
//! interpolant. Error control is per component,
//! `|err_i| <= atol + rtol * max(|y_i|, |y_new_i|)`, in the max norm.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::numeric::{brent_root, norm};
use crate::polycore::{CompiledPoly, Poly, PolyError, RationalFn};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("domain guard violated at {point:?} (t = {t:?})")]
    GuardViolation { t: Option<f64>, point: Vec<f64> },
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("non-finite state or derivative at t = {t:?}")]
    NonFiniteState { t: Option<f64> },
    #[error("step limit of {0} accepted steps exceeded")]
    StepLimit(usize),
    #[error("no section crossing within the trajectory range")]
    NoCrossing,
    #[error("time {t} outside trajectory range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("tolerances must be positive and finite")]
    InvalidTolerance,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

type Rhs = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
type GuardFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A vector field that can be evaluated at points of `R^n`.
///
/// The optional guard is a scalar function whose zero set bounds the valid
/// domain: a point is valid when the guard is finite and nonzero, and an
/// integration run additionally requires the guard to keep the sign it had at
/// the initial point.
#[derive(Clone)]
pub struct EvaluableField {
    dim: usize,
    rhs: Arc<Rhs>,
    guard: Option<Arc<GuardFn>>,
}

impl fmt::Debug for EvaluableField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EvaluableField").field("dim", &self.dim).field("guarded", &self.guard.is_some()).finish()
    }
}

fn check_components(components: &[Poly]) -> Result<usize, FlowError> {
    let n = components.len();
    if let Some(p) = components.iter().find(|p| p.nvars() != n) {
        return Err(FlowError::DimensionMismatch { expected: n, found: p.nvars() });
    }
    Ok(n)
}

impl EvaluableField {
    pub fn from_fn<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        EvaluableField { dim, rhs: Arc::new(f), guard: None }
    }

    pub fn with_guard<G>(mut self, guard: G) -> Self
    where
        G: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        self.guard = Some(Arc::new(guard));
        self
    }

    /// `W = V` with polynomial components.
    pub fn polynomial(components: &[Poly]) -> Result<Self, FlowError> {
        let n = check_components(components)?;
        let compiled: Vec<CompiledPoly> = components.iter().map(Poly::compile).collect();
        Ok(Self::from_fn(n, move |z, out| {
            for (o, p) in out.iter_mut().zip(&compiled) {
                *o = p.eval(z);
            }
        }))
    }

    /// `W_i = num_i / den`, guarded by `den`.
    pub fn rational(nums: &[Poly], den: &Poly) -> Result<Self, FlowError> {
        let n = check_components(nums)?;
        if den.nvars() != n {
            return Err(FlowError::DimensionMismatch { expected: n, found: den.nvars() });
        }
        if den.is_zero() {
            return Err(PolyError::ZeroDenominator.into());
        }
        let nums: Vec<CompiledPoly> = nums.iter().map(Poly::compile).collect();
        let den_rhs = den.compile();
        let den_guard = den.compile();
        Ok(Self::from_fn(n, move |z, out| {
            let d = den_rhs.eval(z);
            for (o, p) in out.iter_mut().zip(&nums) {
                *o = p.eval(z) / d;
            }
        })
        .with_guard(move |z| den_guard.eval(z)))
    }

    /// `W = α V` evaluated as `P(z) V(z) / Q(z)` for `α = P/Q`.
    pub fn scaled(components: &[Poly], alpha: &RationalFn) -> Result<Self, FlowError> {
        let n = check_components(components)?;
        if alpha.nvars() != n {
            return Err(FlowError::DimensionMismatch { expected: n, found: alpha.nvars() });
        }
        let nums: Vec<Poly> = components.iter().map(|v| alpha.num() * v).collect();
        Self::rational(&nums, alpha.den())
    }

    /// The field `-W`, whose flow is `φ(-t, ·)`.
    pub fn reversed(&self) -> Self {
        let rhs = Arc::clone(&self.rhs);
        EvaluableField {
            dim: self.dim,
            rhs: Arc::new(move |z: &[f64], out: &mut [f64]| {
                rhs(z, out);
                for o in out.iter_mut() {
                    *o = -*o;
                }
            }),
            guard: self.guard.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn guard_value(&self, z: &[f64]) -> Option<f64> {
        self.guard.as_ref().map(|g| g(z))
    }

    pub fn is_valid_at(&self, z: &[f64]) -> bool {
        match self.guard_value(z) {
            None => true,
            Some(g) => g.is_finite() && g != 0.0,
        }
    }

    pub fn eval(&self, z: &[f64]) -> Result<Vec<f64>, FlowError> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(z, &mut out)?;
        Ok(out)
    }

    pub fn eval_into(&self, z: &[f64], out: &mut [f64]) -> Result<(), FlowError> {
        if z.len() != self.dim {
            return Err(FlowError::DimensionMismatch { expected: self.dim, found: z.len() });
        }
        if z.iter().any(|x| !x.is_finite()) {
            return Err(FlowError::NonFiniteState { t: None });
        }
        if !self.is_valid_at(z) {
            return Err(FlowError::GuardViolation { t: None, point: z.to_vec() });
        }
        (self.rhs)(z, out);
        if out.iter().any(|x| !x.is_finite()) {
            return Err(FlowError::NonFiniteState { t: None });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Longest time span a single run may cover.
    pub horizon: f64,
    pub max_steps: usize,
    pub max_step: Option<f64>,
    pub initial_step: Option<f64>,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self::with_tol(1e-12)
    }
}

impl FlowOptions {
    pub fn with_tol(tol: f64) -> Self {
        FlowOptions { rtol: tol, atol: tol, horizon: 1e4, max_steps: 10_000_000, max_step: None, initial_step: None }
    }

    fn validate(&self) -> Result<(), FlowError> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if ok(self.rtol) && ok(self.atol) && ok(self.horizon) && self.max_step.is_none_or(ok) {
            Ok(())
        } else {
            Err(FlowError::InvalidTolerance)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// Requested end time reached.
    EndTime,
    /// The caller's stop predicate fired.
    Stopped,
    /// The horizon was reached without the stop predicate firing.
    Horizon,
}

/// One accepted step together with its continuous extension.
#[derive(Clone, Debug)]
pub struct Segment {
    pub t0: f64,
    pub t1: f64,
    pub y0: Vec<f64>,
    pub y1: Vec<f64>,
    cont: [Vec<f64>; 4],
}

impl Segment {
    fn eval(&self, t: f64) -> Vec<f64> {
        let h = self.t1 - self.t0;
        let th = (t - self.t0) / h;
        if th == 1.0 {
            return self.y1.clone();
        }
        let th1 = 1.0 - th;
        let [c1, c2, c3, c4] = &self.cont;
        (0..self.y0.len()).map(|i| self.y0[i] + th * (c1[i] + th1 * (c2[i] + th * (c3[i] + th1 * c4[i])))).collect()
    }
}

/// Solution `φ(t, z0)` on `[t_start, t_end]` (or `[t_end, t_start]` for
/// backward runs), queryable at any time in range.
#[derive(Clone, Debug)]
pub struct Trajectory {
    z0: Vec<f64>,
    t0: f64,
    dir: f64,
    segments: Vec<Segment>,
    pub rtol: f64,
    pub atol: f64,
    pub termination: Termination,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn initial_state(&self) -> &[f64] {
        &self.z0
    }

    pub fn t_start(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.segments.last().map_or(self.t0, |s| s.t1)
    }

    pub fn end_state(&self) -> &[f64] {
        self.segments.last().map_or(&self.z0, |s| &s.y1)
    }

    /// `+1` for forward runs, `-1` for backward runs.
    pub fn direction(&self) -> f64 {
        self.dir
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn accepted_steps(&self) -> usize {
        self.segments.len()
    }

    /// `(t, state)` at the initial point and at every accepted step.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, &[f64])> {
        std::iter::once((self.t0, self.z0.as_slice())).chain(self.segments.iter().map(|s| (s.t1, s.y1.as_slice())))
    }

    fn elapsed(&self, t: f64) -> f64 {
        self.dir * (t - self.t0)
    }

    pub fn contains_time(&self, t: f64) -> bool {
        let e = self.elapsed(t);
        e >= 0.0 && e <= self.elapsed(self.t_end())
    }

    fn segment_index(&self, t: f64) -> usize {
        let e = self.elapsed(t);
        let i = self.segments.partition_point(|s| self.dir * (s.t1 - self.t0) < e);
        i.min(self.segments.len().saturating_sub(1))
    }

    /// Interpolated state at time `t`.
    pub fn flow_at(&self, t: f64) -> Result<Vec<f64>, FlowError> {
        if !self.contains_time(t) {
            let (a, b) = (self.t0, self.t_end());
            return Err(FlowError::OutOfRange { t, start: a.min(b), end: a.max(b) });
        }
        if t == self.t0 || self.segments.is_empty() {
            return Ok(self.z0.clone());
        }
        Ok(self.segments[self.segment_index(t)].eval(t))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Section function goes from negative to positive.
    Rising,
    /// Section function goes from positive to negative.
    Falling,
    Either,
}

impl Direction {
    fn accepts(self, from: f64, to: f64) -> bool {
        let opposite = from * to < 0.0 || (to == 0.0 && from != 0.0);
        opposite
            && match self {
                Direction::Rising => from < 0.0,
                Direction::Falling => from > 0.0,
                Direction::Either => true,
            }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Crossing {
    pub t: f64,
    pub z: Vec<f64>,
}

/// First crossing of `section(z) = 0` in `direction`, strictly after `t_from`
/// along the integration direction, refined on the continuous output.
pub fn locate_crossing<S>(
    traj: &Trajectory,
    section: S,
    direction: Direction,
    t_from: f64,
) -> Result<Crossing, FlowError>
where
    S: Fn(&[f64]) -> f64,
{
    let z_from = traj.flow_at(t_from)?;
    if traj.segments.is_empty() {
        return Err(FlowError::NoCrossing);
    }
    let mut prev_t = t_from;
    let mut prev_s = section(&z_from);
    let mut prev_z = z_from;
    let start = traj.segment_index(t_from);
    for seg in &traj.segments[start..] {
        if traj.dir * (seg.t1 - t_from) <= 0.0 {
            continue;
        }
        let cur_s = section(&seg.y1);
        if prev_s != 0.0 && direction.accepts(prev_s, cur_s) {
            if cur_s == 0.0 {
                return Ok(Crossing { t: seg.t1, z: seg.y1.clone() });
            }
            let scale = 1.0 + norm(&prev_z);
            let f = |t: f64| section(&traj.flow_at(t).expect("bracket inside trajectory"));
            let t = brent_root(f, prev_t, seg.t1, prev_s, cur_s, 1e-13 * scale, 200);
            return Ok(Crossing { t, z: traj.flow_at(t)? });
        }
        if cur_s != 0.0 {
            prev_t = seg.t1;
            prev_s = cur_s;
            prev_z = seg.y1.clone();
        }
    }
    Err(FlowError::NoCrossing)
}

/// `φ(t, traj.z0)`; convenience wrapper over [`Trajectory::flow_at`].
pub fn flow_at(traj: &Trajectory, t: f64) -> Result<Vec<f64>, FlowError> {
    traj.flow_at(t)
}

/// Integrates from `z0` at `t = 0` to `t_end` (which may be negative).
pub fn integrate(field: &EvaluableField, z0: &[f64], t_end: f64, opts: &FlowOptions) -> Result<Trajectory, FlowError> {
    run(field, z0, Some(t_end), opts, &mut |_| false)
}

/// Integrates forward from `z0` until `stop` returns true after an accepted
/// step, or until `opts.horizon` is reached.
pub fn integrate_until<F>(
    field: &EvaluableField,
    z0: &[f64],
    opts: &FlowOptions,
    mut stop: F,
) -> Result<Trajectory, FlowError>
where
    F: FnMut(&Trajectory) -> bool,
{
    run(field, z0, None, opts, &mut stop)
}

// Dormand–Prince 5(4) tableau; the fields are autonomous, so the nodes c_i are not needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

struct Stages {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
}

enum StepOutcome {
    Done(f64),
    /// A stage point left the valid domain.
    Invalid(StageFault),
}

#[derive(Clone, Copy)]
enum StageFault {
    Guard,
    NonFinite,
}

fn guard_sign(field: &EvaluableField, z: &[f64]) -> f64 {
    field.guard_value(z).map_or(1.0, f64::signum)
}

fn stage_ok(field: &EvaluableField, sign: f64, z: &[f64], out: &mut [f64]) -> Result<(), StageFault> {
    match field.eval_into(z, out) {
        Err(FlowError::GuardViolation { .. }) => return Err(StageFault::Guard),
        Err(_) => return Err(StageFault::NonFinite),
        Ok(()) => {}
    }
    match field.guard_value(z) {
        Some(g) if g.signum() != sign => Err(StageFault::Guard),
        _ => Ok(()),
    }
}

fn attempt(field: &EvaluableField, sign: f64, y: &[f64], h: f64, st: &mut Stages, opts: &FlowOptions) -> StepOutcome {
    let n = y.len();
    let Stages { k, tmp, y_new } = st;
    let (k1, rest) = k.split_first_mut().unwrap();
    let [k2, k3, k4, k5, k6, k7] = rest else { unreachable!() };

    for i in 0..n {
        tmp[i] = y[i] + h * A21 * k1[i];
    }
    if let Err(f) = stage_ok(field, sign, tmp, k2) {
        return StepOutcome::Invalid(f);
    }
    for i in 0..n {
        tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    }
    if let Err(f) = stage_ok(field, sign, tmp, k3) {
        return StepOutcome::Invalid(f);
    }
    for i in 0..n {
        tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    }
    if let Err(f) = stage_ok(field, sign, tmp, k4) {
        return StepOutcome::Invalid(f);
    }
    for i in 0..n {
        tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    if let Err(f) = stage_ok(field, sign, tmp, k5) {
        return StepOutcome::Invalid(f);
    }
    for i in 0..n {
        tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    if let Err(f) = stage_ok(field, sign, tmp, k6) {
        return StepOutcome::Invalid(f);
    }
    for i in 0..n {
        y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
    }
    if let Err(f) = stage_ok(field, sign, y_new, k7) {
        return StepOutcome::Invalid(f);
    }
    let mut err: f64 = 0.0;
    for i in 0..n {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
        err = err.max(e.abs() / sc);
    }
    StepOutcome::Done(err)
}

fn initial_step(
    field: &EvaluableField,
    sign: f64,
    y0: &[f64],
    f0: &[f64],
    dir: f64,
    hmax: f64,
    opts: &FlowOptions,
) -> f64 {
    let sk: Vec<f64> = y0.iter().map(|y| opts.atol + opts.rtol * y.abs()).collect();
    let d0 = y0.iter().zip(&sk).map(|(y, s)| (y / s).abs()).fold(0.0, f64::max);
    let d1 = f0.iter().zip(&sk).map(|(f, s)| (f / s).abs()).fold(0.0, f64::max);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(hmax);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + dir * h0 * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    if stage_ok(field, sign, &y1, &mut f1).is_err() {
        return h0;
    }
    let d2 = f1.iter().zip(f0).zip(&sk).map(|((a, b), s)| ((a - b) / s).abs()).fold(0.0, f64::max) / h0;
    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / dm).powf(0.2) };
    (100.0 * h0).min(h1).min(hmax)
}

fn run(
    field: &EvaluableField,
    z0: &[f64],
    t_end: Option<f64>,
    opts: &FlowOptions,
    stop: &mut dyn FnMut(&Trajectory) -> bool,
) -> Result<Trajectory, FlowError> {
    opts.validate()?;
    let n = field.dim();
    if z0.len() != n {
        return Err(FlowError::DimensionMismatch { expected: n, found: z0.len() });
    }
    let mut traj = Trajectory {
        z0: z0.to_vec(),
        t0: 0.0,
        dir: 1.0,
        segments: Vec::new(),
        rtol: opts.rtol,
        atol: opts.atol,
        termination: Termination::EndTime,
        rejected_steps: 0,
    };
    let target = match t_end {
        Some(t) => {
            if !t.is_finite() {
                return Err(FlowError::InvalidTolerance);
            }
            t
        }
        None => opts.horizon,
    };
    let dir = if target < 0.0 { -1.0 } else { 1.0 };
    traj.dir = dir;

    let mut st = Stages { k: std::array::from_fn(|_| vec![0.0; n]), tmp: vec![0.0; n], y_new: vec![0.0; n] };
    field.eval_into(z0, &mut st.k[0]).map_err(|e| match e {
        FlowError::GuardViolation { point, .. } => FlowError::GuardViolation { t: Some(0.0), point },
        FlowError::NonFiniteState { .. } => FlowError::NonFiniteState { t: Some(0.0) },
        other => other,
    })?;
    if target == 0.0 {
        return Ok(traj);
    }
    let sign = guard_sign(field, z0);
    let hmax = opts.max_step.unwrap_or(target.abs()).min(target.abs());
    let mut h = dir
        * match opts.initial_step {
            Some(h) => h.abs().min(hmax),
            None => initial_step(field, sign, z0, &st.k[0], dir, hmax, opts),
        };

    let mut t = 0.0;
    let mut y = z0.to_vec();
    let mut last_rejected = false;
    loop {
        if dir * (target - t) <= 0.0 {
            traj.termination = if t_end.is_some() { Termination::EndTime } else { Termination::Horizon };
            return Ok(traj);
        }
        if traj.segments.len() >= opts.max_steps {
            return Err(FlowError::StepLimit(opts.max_steps));
        }
        let hmin = 1e-14 * t.abs().max(1.0);
        let remaining = target - t;
        let last = h.abs() >= remaining.abs();
        if last {
            h = remaining;
        }
        match attempt(field, sign, &y, h, &mut st, opts) {
            StepOutcome::Invalid(fault) => {
                traj.rejected_steps += 1;
                last_rejected = true;
                h *= 0.25;
                if h.abs() < hmin {
                    return Err(match fault {
                        StageFault::Guard => FlowError::GuardViolation { t: Some(t), point: y },
                        StageFault::NonFinite => FlowError::NonFiniteState { t: Some(t) },
                    });
                }
            }
            StepOutcome::Done(err) if err.is_finite() && err <= 1.0 => {
                let t_new = if last { target } else { t + h };
                let Stages { k, y_new, .. } = &st;
                let ydiff: Vec<f64> = y_new.iter().zip(&y).map(|(a, b)| a - b).collect();
                let bspl: Vec<f64> = (0..n).map(|i| h * k[0][i] - ydiff[i]).collect();
                let c3: Vec<f64> = (0..n).map(|i| ydiff[i] - h * k[6][i] - bspl[i]).collect();
                let c4: Vec<f64> = (0..n)
                    .map(|i| {
                        h * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i])
                    })
                    .collect();
                traj.segments.push(Segment {
                    t0: t,
                    t1: t_new,
                    y0: y.clone(),
                    y1: y_new.clone(),
                    cont: [ydiff, bspl, c3, c4],
                });
                t = t_new;
                y.copy_from_slice(&st.y_new);
                let (first, rest) = st.k.split_first_mut().unwrap();
                first.copy_from_slice(&rest[5]);

                if stop(&traj) {
                    traj.termination = Termination::Stopped;
                    return Ok(traj);
                }
                let mut fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if last_rejected {
                    fac = fac.min(1.0);
                }
                last_rejected = false;
                h = dir * (h.abs() * fac).min(hmax);
            }
            StepOutcome::Done(err) => {
                traj.rejected_steps += 1;
                last_rejected = true;
                let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).max(0.2) } else { 0.2 };
                h *= fac;
                if h.abs() < hmin {
                    return Err(FlowError::StepSizeUnderflow { t, h });
                }
            }
        }
    }
}
