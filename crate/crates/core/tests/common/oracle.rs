//! Reference computations that share no code with the library: adaptive
//! Simpson quadrature for period integrals along circular orbits, and a
//! fixed-step RK4 integrator for the Van der Pol limit cycle.

#![allow(dead_code)]

use std::f64::consts::PI;

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    // split into panels first so periodic integrands are not under-sampled
    let panels = 16;
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let (lo, hi) = (a + k as f64 * w, a + (k + 1) as f64 * w);
            let m = 0.5 * (lo + hi);
            let (flo, fhi, fm) = (f(lo), f(hi), f(m));
            let whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
            simpson_step(&f, lo, flo, hi, fhi, m, fm, whole, tol / panels as f64, 50)
        })
        .sum()
}

/// Period of the circle of radius `r` for a field `h(x, y) (y, -x)` with `h`
/// of constant sign on the circle: the angular speed is `|h|`.
pub fn circle_period<H: Fn(f64, f64) -> f64>(h: H, r: f64) -> f64 {
    adaptive_simpson(|th| 1.0 / h(r * th.cos(), r * th.sin()).abs(), 0.0, 2.0 * PI, 1e-13)
}

/// Time spent on the circle of radius `r` by `α h (y, -x)`: `∫ dθ / |α h|`.
pub fn scaled_circle_period<H: Fn(f64, f64) -> f64, A: Fn(f64, f64) -> f64>(h: H, alpha: A, r: f64) -> f64 {
    circle_period(|x, y| alpha(x, y) * h(x, y), r)
}

fn vdp(z: [f64; 2]) -> [f64; 2] {
    [z[1], -z[0] - z[1] * (z[0] * z[0] - 1.0)]
}

fn rk4(f: fn([f64; 2]) -> [f64; 2], z: [f64; 2], h: f64) -> [f64; 2] {
    let k1 = f(z);
    let k2 = f([z[0] + 0.5 * h * k1[0], z[1] + 0.5 * h * k1[1]]);
    let k3 = f([z[0] + 0.5 * h * k2[0], z[1] + 0.5 * h * k2[1]]);
    let k4 = f([z[0] + h * k3[0], z[1] + h * k3[1]]);
    [
        z[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        z[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Cubic Hermite interpolation of component `i` on `[0, h]`.
fn hermite(z0: [f64; 2], f0: [f64; 2], z1: [f64; 2], f1: [f64; 2], h: f64, s: f64, i: usize) -> f64 {
    let t = s / h;
    let h00 = 2.0 * t * t * t - 3.0 * t * t + 1.0;
    let h10 = t * t * t - 2.0 * t * t + t;
    let h01 = -2.0 * t * t * t + 3.0 * t * t;
    let h11 = t * t * t - t * t;
    h00 * z0[i] + h10 * h * f0[i] + h01 * z1[i] + h11 * h * f1[i]
}

/// Van der Pol (μ = 1) limit cycle from a long fixed-step RK4 run: returns
/// `(period, x at the downward crossing of y = 0, min x, max x)`.
pub fn vanderpol_limit_cycle() -> (f64, f64, f64, f64) {
    let h = 1e-3;
    let mut z = [2.0, 0.0];
    let mut t = 0.0;
    // transient
    while t < 200.0 {
        z = rk4(vdp, z, h);
        t += h;
    }
    let mut crossings: Vec<(f64, f64)> = Vec::new();
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    while crossings.len() < 6 {
        let z1 = rk4(vdp, z, h);
        xmin = xmin.min(z1[0]);
        xmax = xmax.max(z1[0]);
        if z[1] > 0.0 && z1[1] <= 0.0 && z[0] > 0.0 {
            let (f0, f1) = (vdp(z), vdp(z1));
            let (mut a, mut b) = (0.0, h);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if hermite(z, f0, z1, f1, h, m, 1) > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            let s = 0.5 * (a + b);
            crossings.push((t + s, hermite(z, f0, z1, f1, h, s, 0)));
        }
        z = z1;
        t += h;
    }
    let n = crossings.len();
    let period = (crossings[n - 1].0 - crossings[1].0) / (n - 2) as f64;
    (period, crossings[n - 1].1, xmin, xmax)
}
