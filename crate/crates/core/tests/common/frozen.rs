//! Reference values computed once by the independent oracles in `oracle.rs`
//! and frozen here. `tests/oracles.rs` checks that the oracles still
//! reproduce them.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Period of `(y h, -x h)` with `h = 1 - x^2` through `(r, 0)`.
pub fn x2_family_period(r: f64) -> f64 {
    2.0 * PI / (1.0 - r * r).sqrt()
}

/// Radii 0.1..=0.6 for the `(x+y)^2` family; closed form `2π/sqrt(1 - 2r^2)`.
pub const XY_FAMILY: [(f64, f64); 6] = [
    (0.1, 6.346975625940523),
    (0.2, 6.550673513692863),
    (0.3, 6.938617420828951),
    (0.4, 7.619481378479525),
    (0.5, 8.885765876316732),
    (0.6, 11.874104117237257),
];

/// Radii 0.1..=0.6 for `h = (1 - x^2)(1 - y^4)`.
pub const DOUBLE_REVERSIBLE: [(f64, f64); 6] = [
    (0.1, 6.315074864823908),
    (0.2, 6.416549001277993),
    (0.3, 6.606063981190621),
    (0.4, 6.918718651833274),
    (0.5, 7.416518462458221),
    (0.6, 8.214283583290895),
];

/// Harmonic oscillator divided by `1 + x^2`, through `(0.5, 0)`.
pub const INCOMPATIBLE_T_HALF: f64 = 7.068583470577035;

/// Van der Pol (`μ = 1`) limit cycle.
pub const VDP_PERIOD: f64 = 6.663286859355836;
pub const VDP_AMPLITUDE: f64 = 2.00861986;
