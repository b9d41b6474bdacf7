//! Systems whose symmetry has been verified exactly, for flow-level checks.
#![allow(dead_code)]

use equiperiod::polycore::Poly;
use equiperiod::symmetry::{check_reversible, check_symmetric, AffineInvolution};

fn polys(a: &str, b: &str) -> Vec<Poly> {
    let p = |s: &str| Poly::parse(s, &["x", "y"]).unwrap();
    vec![p(a), p(b)]
}

/// Verified systems used for the commutation properties: (field, σ, reversible?).
pub fn verified_systems() -> Vec<(Vec<Poly>, AffineInvolution, bool)> {
    let mirror_y = AffineInvolution::reflect_axis(2, 0);
    let mirror_x = AffineInvolution::reflect_axis(2, 1);
    let origin = AffineInvolution::point_reflection(2);
    let systems = vec![
        (polys("y*(1 - x^2)", "-x*(1 - x^2)"), mirror_y.clone(), true),
        (polys("y*(1 - x^2)*(1 - y^4)", "-x*(1 - x^2)*(1 - y^4)"), mirror_x.clone(), true),
        (polys("y*(1 + x^2)", "-x*(1 + y^2)"), mirror_y, true),
        (polys("y*(1 + x^2)", "-x*(1 + y^2)"), mirror_x, true),
        (polys("y*(1 - (x + y)^2)", "-x*(1 - (x + y)^2)"), origin.clone(), false),
        (polys("y", "-x - y*(x^2 - 1)"), origin.clone(), false),
        (polys("y*(1 - x^2/9)", "(-x - y*(x^2 - 1))*(1 - x^2/9)"), origin, false),
    ];
    for (v, s, rev) in &systems {
        let ok = if *rev { check_reversible(v, s) } else { check_symmetric(v, s) };
        assert!(ok.unwrap().holds());
    }
    systems
}
