//! End-to-end acceptance run: each criterion prints one PASS/FAIL line, and
//! the process fails if any criterion does.
mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::frozen::{DOUBLE_REVERSIBLE, VDP_PERIOD, XY_FAMILY};
use common::gen::{involution2, poly};
use common::oracle::{adaptive_simpson, circle_period, scaled_circle_period, vanderpol_limit_cycle};
use common::systems::verified_systems;
use equiperiod::cycles::{
    find_limit_cycle, fixed_points_on_cycle, measure_period, verify_half_period_symmetry, CycleClass, CycleOptions,
    Ray, Section,
};
use equiperiod::equiv::{
    compare_periods, corollary_pair, delta_pair, double_reversibility_suite, guard_cycle, make_pair,
};
use equiperiod::flow::{integrate, EvaluableField, FlowOptions};
use equiperiod::polycore::{Poly, RationalFn};
use equiperiod::symmetry::{
    alpha_from_delta, check_compatible, check_reversible, check_symmetric, delta_from_alpha, is_sigma_odd,
    AffineInvolution, Involution, SymmetryKind,
};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn p(s: &str) -> Poly {
    Poly::parse(s, &["x", "y"]).unwrap()
}

fn hfield(h: &str) -> Vec<Poly> {
    vec![p(&format!("y*({h})")), p(&format!("-x*({h})"))]
}

fn lienard(f: &str, h: &str) -> Vec<Poly> {
    vec![p(&format!("y*({h})")), p(&format!("(-x - y*({f}))*({h})"))]
}

fn x_axis() -> Ray {
    Ray::new(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap()
}

fn tenths(n: usize) -> Vec<f64> {
    (1..=n).map(|k| k as f64 / 10.0).collect()
}

fn mirror_y() -> AffineInvolution {
    AffineInvolution::reflect_axis(2, 0)
}

fn mirror_x() -> AffineInvolution {
    AffineInvolution::reflect_axis(2, 1)
}

fn origin() -> AffineInvolution {
    AffineInvolution::point_reflection(2)
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(elapsed: Duration, budget: f64) -> Result<(), String> {
    if elapsed.as_secs_f64() < budget {
        Ok(())
    } else {
        Err(format!("took {:.2} s, budget {budget} s", elapsed.as_secs_f64()))
    }
}

fn symbolic_suite() -> Outcome {
    let start = Instant::now();
    let mut checks = 0;
    let mut ok = |name: &str, holds: bool| -> Result<(), String> {
        checks += 1;
        if holds {
            Ok(())
        } else {
            Err(format!("{name} failed"))
        }
    };
    let rev = |v: &[Poly], s: &AffineInvolution| check_reversible(v, s).unwrap().holds();
    let sym = |v: &[Poly], s: &AffineInvolution| check_symmetric(v, s).unwrap().holds();
    let odd = |d: &str, s: &AffineInvolution| is_sigma_odd(&p(d), s).unwrap().holds;
    let compatible = |den: &str, s: &AffineInvolution| {
        check_compatible(&RationalFn::new(Poly::one(2), p(den)).unwrap(), s).unwrap().holds
    };

    ok("harmonic reversible", rev(&hfield("1"), &mirror_y()))?;
    let two_axis = vec![p("y*(1 + x^2)"), p("-x*(1 + y^2)")];
    ok("(1+x^2, 1+y^2) reversible in x", rev(&two_axis, &mirror_y()))?;
    ok("(1+x^2, 1+y^2) reversible in y", rev(&two_axis, &mirror_x()))?;

    ok("(1-x^2) family reversible", rev(&hfield("1 - x^2"), &mirror_y()))?;
    ok("delta = x odd", odd("x", &mirror_y()))?;
    ok("1/(1+x) compatible", compatible("1 + x", &mirror_y()))?;
    delta_pair(&hfield("1 - x^2"), &p("x"), &mirror_y(), SymmetryKind::Reversible)
        .and_then(|pair| pair.with_scaled_field(hfield("1 - x"), Poly::one(2)))
        .map_err(|e| format!("(1-x) reduction: {e}"))?;

    let double = "(1 - x^2)*(1 - y^4)";
    ok("(1-y^4) family reversible in x", rev(&hfield(double), &mirror_y()))?;
    ok("(1-y^4) family reversible in y", rev(&hfield(double), &mirror_x()))?;
    ok("delta = -y odd", odd("-y", &mirror_x()))?;
    ok("1/(1-y) compatible", compatible("1 - y", &mirror_x()))?;
    for (s, d, reduced) in [(mirror_y(), "x", "(1 - x)*(1 - y^4)"), (mirror_x(), "-y", "(1 - x^2)*(1 + y + y^2 + y^3)")]
    {
        delta_pair(&hfield(double), &p(d), &s, SymmetryKind::Reversible)
            .and_then(|pair| pair.with_scaled_field(hfield(reduced), Poly::one(2)))
            .map_err(|e| format!("{reduced}: {e}"))?;
    }

    ok("(x+y)^2 family symmetric", sym(&hfield("1 - (x + y)^2"), &origin()))?;
    ok("delta = x+y odd", odd("x + y", &origin()))?;
    ok("1/(1+x+y) compatible", compatible("1 + x + y", &origin()))?;
    delta_pair(&hfield("1 - (x + y)^2"), &p("x + y"), &origin(), SymmetryKind::Symmetric)
        .and_then(|pair| pair.with_scaled_field(hfield("1 - x - y"), Poly::one(2)))
        .map_err(|e| format!("(1-x-y) reduction: {e}"))?;

    ok("Van der Pol symmetric", sym(&lienard("x^2 - 1", "1"), &origin()))?;
    ok("Van der Pol not reversible", !rev(&lienard("x^2 - 1", "1"), &mirror_y()))?;
    let pair = corollary_pair(&lienard("x^2 - 1", "1"), &p("x/3"), &origin(), SymmetryKind::Symmetric)
        .map_err(|e| format!("Lienard pair: {e}"))?;
    ok("Lienard pair hypotheses", pair.hypotheses.holds())?;
    ok("Lienard base is (1 - x^2/9) VdP", pair.base == lienard("x^2 - 1", "x^2/9 - 1"))?;
    pair.with_scaled_field(lienard("x^2 - 1", "x/3 - 1"), Poly::one(2)).map_err(|e| format!("Lienard scaled: {e}"))?;

    ok("1/(1+x^2) flagged incompatible", !compatible("1 + x^2", &mirror_y()))?;
    within(start.elapsed(), 1.0)?;
    Ok(format!("{checks} exact checks in {:.0} ms", start.elapsed().as_secs_f64() * 1e3))
}

fn alpha_delta_round_trip() -> Outcome {
    let start = Instant::now();
    let mut runner = TestRunner::deterministic();
    let (qs, sigmas) = (poly(2, 4, 8), involution2());
    let mut n = 0;
    while n < 100 {
        let q = qs.new_tree(&mut runner).unwrap().current();
        let s = sigmas.new_tree(&mut runner).unwrap().current();
        let delta = &q - &q.compose_affine(&s).unwrap();
        if delta.is_zero() {
            continue;
        }
        ensure!(is_sigma_odd(&delta, &s).unwrap().holds, "q - q∘σ not odd for {s:?}");
        let alpha = alpha_from_delta(&delta);
        ensure!(check_compatible(&alpha, &s).unwrap().holds, "alpha from {delta:?} not compatible");
        let back = delta_from_alpha(&alpha).map_err(|e| e.to_string())?;
        ensure!(back.cross_eq(&RationalFn::from_poly(delta.clone())), "delta_from_alpha did not invert {delta:?}");
        n += 1;
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!("{n} random odd deltas, {:.2} s", start.elapsed().as_secs_f64()))
}

fn reversible_pair() -> Outcome {
    let start = Instant::now();
    let pair = delta_pair(&hfield("1 - x^2"), &p("x"), &mirror_y(), SymmetryKind::Reversible)
        .and_then(|pair| pair.with_scaled_field(hfield("1 - x"), Poly::one(2)))
        .map_err(|e| e.to_string())?;
    let report = compare_periods(&pair, &x_axis(), &tenths(9), &CycleOptions::default()).map_err(|e| e.to_string())?;
    ensure!(report.hypotheses_hold(), "hypotheses do not hold");
    ensure!(report.rows.iter().all(|r| r.eligible()), "ineligible rows:\n{report}");
    let max_rel = report.max_rel_dt().unwrap();
    ensure!(max_rel <= 1e-7, "max rel dT {max_rel:e}");
    let mut worst: f64 = 0.0;
    for row in &report.rows {
        let oracle = circle_period(|x, _| 1.0 - x * x, row.r);
        ensure!((oracle - 2.0 * PI / (1.0 - row.r * row.r).sqrt()).abs() < 1e-10, "quadrature off at r={}", row.r);
        worst = worst.max((row.t_base - oracle).abs()).max((row.t_scaled - oracle).abs());
    }
    ensure!(worst <= 1e-7, "oracle defect {worst:e}");
    within(start.elapsed(), 30.0)?;
    Ok(format!("max rel dT {max_rel:.1e}, oracle defect {worst:.1e}"))
}

fn symmetric_pair() -> Outcome {
    let start = Instant::now();
    let pair = delta_pair(&hfield("1 - (x + y)^2"), &p("x + y"), &origin(), SymmetryKind::Symmetric)
        .and_then(|pair| pair.with_scaled_field(hfield("1 - x - y"), Poly::one(2)))
        .map_err(|e| e.to_string())?;
    let radii = tenths(6);
    let report = compare_periods(&pair, &x_axis(), &radii, &CycleOptions::default()).map_err(|e| e.to_string())?;
    ensure!(report.hypotheses_hold(), "hypotheses do not hold");
    ensure!(report.rows.iter().all(|r| r.eligible()), "ineligible rows:\n{report}");
    let max_rel = report.max_rel_dt().unwrap();
    ensure!(max_rel <= 1e-7, "max rel dT {max_rel:e}");
    let mut worst: f64 = 0.0;
    for (row, (r, frozen)) in report.rows.iter().zip(XY_FAMILY) {
        let oracle = adaptive_simpson(|th| 1.0 / (1.0 - r * r * (1.0 - (2.0 * th).sin())), 0.0, 2.0 * PI, 1e-13);
        ensure!((oracle - frozen).abs() < 1e-10, "quadrature drifted at r={r}");
        worst = worst.max((row.t_base - oracle).abs()).max((row.t_scaled - oracle).abs());
    }
    ensure!(worst <= 1e-7, "oracle defect {worst:e}");
    within(start.elapsed(), 30.0)?;
    Ok(format!("max rel dT {max_rel:.1e}, oracle defect {worst:.1e}"))
}

fn fixed_points() -> Outcome {
    let field = EvaluableField::polynomial(&hfield("1 - x^2")).unwrap();
    let opts = CycleOptions::default();
    let sigma = mirror_y();
    let mut worst: f64 = 0.0;
    for r in tenths(9) {
        let c = measure_period(&field, &[r, 0.0], &opts).map_err(|e| format!("r={r}: {e}"))?;
        let fp = fixed_points_on_cycle(&c, &sigma).map_err(|e| format!("r={r}: {e}"))?;
        ensure!(fp.distinct == 2, "r={r}: {} fixed points", fp.distinct);
        let half = c.state_at(fp.first.t + 0.5 * c.period);
        let map_defect = half.iter().zip(&fp.second.z).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let off_axis = fp.first.z[0].abs().max(fp.second.z[0].abs());
        let apart = (fp.first.z[1] - fp.second.z[1]).abs();
        ensure!(off_axis <= 1e-7, "r={r}: fixed point off x = 0 by {off_axis:e}");
        ensure!(map_defect <= 1e-7, "r={r}: half-period map defect {map_defect:e}");
        ensure!((apart - 2.0 * r).abs() <= 1e-7, "r={r}: fixed points {apart} apart");
        worst = worst.max(off_axis).max(map_defect);
    }
    Ok(format!("two fixed points on each of 9 cycles, worst defect {worst:.1e}"))
}

fn half_period() -> Outcome {
    let opts = CycleOptions::default();
    let sigma = origin();
    let section = Section::new(vec![0.0, 0.0], vec![0.0, 1.0]).unwrap();
    let vdp = EvaluableField::polynomial(&lienard("x^2 - 1", "1")).unwrap();
    let lc = find_limit_cycle(&vdp, &[2.0, 0.0], &section, &opts).map_err(|e| format!("Van der Pol: {e}"))?;
    let mut worst = verify_half_period_symmetry(&lc, &sigma, 64);
    ensure!(worst <= 1e-6, "Van der Pol defect {worst:e}");
    let xy = EvaluableField::polynomial(&hfield("1 - (x + y)^2")).unwrap();
    for r in tenths(6) {
        let c = measure_period(&xy, &[r, 0.0], &opts).map_err(|e| format!("r={r}: {e}"))?;
        let d = verify_half_period_symmetry(&c, &sigma, 64);
        ensure!(d <= 1e-6, "r={r}: defect {d:e}");
        worst = worst.max(d);
    }
    Ok(format!("worst defect {worst:.1e} over 7 cycles"))
}

fn limit_cycle_persistence() -> Outcome {
    let start = Instant::now();
    let opts = CycleOptions::default();
    let section = Section::new(vec![0.0, 0.0], vec![0.0, 1.0]).unwrap();
    let vdp = lienard("x^2 - 1", "1");
    let kind = SymmetryKind::Symmetric;

    let (oracle, ..) = vanderpol_limit_cycle();
    ensure!((oracle - VDP_PERIOD).abs() < 1e-9, "fixed-step oracle drifted: {oracle}");

    // (1 - δ²) VdP against (1 - δ) VdP with δ = x/3
    let pair = corollary_pair(&vdp, &p("x/3"), &origin(), kind).map_err(|e| e.to_string())?;
    ensure!(pair.hypotheses.holds(), "Lienard pair hypotheses do not hold");
    let base = find_limit_cycle(&pair.base_field().unwrap(), &[2.0, 0.0], &section, &opts)
        .map_err(|e| format!("(1 - x^2/9) VdP: {e}"))?;
    let scaled = find_limit_cycle(&pair.scaled_field().unwrap(), &[2.0, 0.0], &section, &opts)
        .map_err(|e| format!("(1 - x/3) VdP: {e}"))?;
    ensure!(base.classification == CycleClass::LimitCycle, "base cycle is {}", base.classification);
    let dt = (base.period - scaled.period).abs();
    ensure!(dt <= 1e-6, "periods {} vs {}", base.period, scaled.period);
    let guard = guard_cycle(&base, &pair.scaler());
    ensure!(guard.ok && guard.min_one_plus_delta > 0.3, "guard min(1+delta) = {}", guard.min_one_plus_delta);

    // VdP against VdP / (1 + x/3)
    let direct = delta_pair(&vdp, &p("x/3"), &origin(), kind).map_err(|e| e.to_string())?;
    let plain = find_limit_cycle(&direct.base_field().unwrap(), &[2.0, 0.0], &section, &opts)
        .map_err(|e| format!("VdP: {e}"))?;
    let divided = find_limit_cycle(&direct.scaled_field().unwrap(), &[2.0, 0.0], &section, &opts)
        .map_err(|e| format!("VdP/(1 + x/3): {e}"))?;
    ensure!((plain.period - oracle).abs() < 1e-4, "VdP period {} vs oracle {oracle}", plain.period);
    let dt2 = (plain.period - divided.period).abs();
    ensure!(dt2 <= 1e-6, "periods {} vs {}", plain.period, divided.period);
    let guard2 = guard_cycle(&plain, &direct.scaler());
    ensure!(guard2.ok && guard2.min_one_plus_delta > 0.3, "guard min(1+delta) = {}", guard2.min_one_plus_delta);

    within(start.elapsed(), 60.0)?;
    Ok(format!(
        "T = {:.10} (dT {dt:.1e}), VdP T = {:.10} (dT {dt2:.1e}, oracle {oracle:.10}), min(1+delta) {:.4}",
        base.period, plain.period, guard.min_one_plus_delta
    ))
}

fn counterexample() -> Outcome {
    let alpha = RationalFn::new(Poly::one(2), p("1 + x^2")).unwrap();
    let pair = make_pair(&hfield("1"), &alpha, &mirror_y()).map_err(|e| e.to_string())?;
    ensure!(!pair.hypotheses.compatibility.holds, "1/(1+x^2) reported compatible");
    let report = compare_periods(&pair, &x_axis(), &[0.5], &CycleOptions::default()).map_err(|e| e.to_string())?;
    let row = &report.rows[0];
    ensure!(row.eligible(), "row not measured: {report}");
    let closed = 2.0 * PI * (1.0 + 0.125);
    let oracle = scaled_circle_period(|_, _| 1.0, |x, _| 1.0 / (1.0 + x * x), 0.5);
    ensure!((oracle - closed).abs() < 1e-10, "quadrature {oracle} vs closed form {closed}");
    ensure!((row.rel_dt - 0.125).abs() < 1e-4, "rel dT {}", row.rel_dt);
    ensure!(!report.periods_agree(1e-7), "equality check passed on an incompatible pair");
    Ok(format!("rel dT {:.12}, equality check rejected", row.rel_dt))
}

fn double_reversibility() -> Outcome {
    let reports = double_reversibility_suite(
        &hfield("(1 - x^2)*(1 - y^4)"),
        &[mirror_y(), mirror_x()],
        &[p("x"), p("-y")],
        &x_axis(),
        &tenths(6),
        &CycleOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for rep in &reports {
        ensure!(rep.hypotheses_hold(), "hypotheses fail for {}", rep.label);
        ensure!(rep.rows.iter().all(|r| r.eligible()), "ineligible rows:\n{rep}");
        let m = rep.max_rel_dt().unwrap();
        ensure!(m <= 1e-7, "{}: max rel dT {m:e}", rep.label);
        worst = worst.max(m);
    }
    let mut oracle_defect: f64 = 0.0;
    for (row, (r, frozen)) in reports[0].rows.iter().zip(DOUBLE_REVERSIBLE) {
        let oracle = circle_period(|x, y| (1.0 - x * x) * (1.0 - y.powi(4)), r);
        ensure!((oracle - frozen).abs() < 1e-10, "quadrature drifted at r={r}");
        oracle_defect = oracle_defect.max((row.t_base - oracle).abs());
    }
    ensure!(oracle_defect <= 1e-7, "base periods off the oracle by {oracle_defect:e}");
    Ok(format!("{} comparisons, max rel dT {worst:.1e}, oracle defect {oracle_defect:.1e}", reports.len()))
}

fn flow_commutation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let opts = FlowOptions::with_tol(1e-12);
    let end = |f: &EvaluableField, z: &[f64], t: f64| integrate(f, z, t, &opts).map(|tr| tr.end_state().to_vec());
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for (v, sigma, reversible) in verified_systems() {
        let f = EvaluableField::polynomial(&v).unwrap();
        for _ in 0..20 {
            let z = [rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)];
            let t: f64 = rng.gen_range(0.1..4.0);
            let lhs = sigma.apply(&end(&f, &z, t).map_err(|e| e.to_string())?);
            let rhs = end(&f, &sigma.apply(&z), if reversible { -t } else { t }).map_err(|e| e.to_string())?;
            let d = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            ensure!(d <= 1e-8, "defect {d:e} at z={z:?}, t={t}");
            worst = worst.max(d);
            n += 1;
        }
    }
    Ok(format!("{n} samples, worst defect {worst:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("symbolic checks of the example systems", symbolic_suite),
        ("alpha/delta round trip", alpha_delta_round_trip),
        ("reversible pair (1-x^2) vs (1-x)", reversible_pair),
        ("symmetric pair (1-(x+y)^2) vs (1-x-y)", symmetric_pair),
        ("fixed points on reversible cycles", fixed_points),
        ("half-period map on symmetric cycles", half_period),
        ("limit-cycle persistence", limit_cycle_persistence),
        ("incompatible scaling is detected", counterexample),
        ("double reversibility", double_reversibility),
        ("flow commutation", flow_commutation),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
