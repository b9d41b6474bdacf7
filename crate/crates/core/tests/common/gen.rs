//! proptest strategies for polynomials and affine involutions.
#![allow(dead_code)]

use equiperiod::polycore::{rational, Poly, Rational};
use equiperiod::symmetry::{make_involution, AffineInvolution};
use proptest::prelude::*;

/// Polynomials in `nvars` variables with total degree at most `max_deg` and
/// small rational coefficients.
pub fn poly(nvars: usize, max_deg: u32, max_terms: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec((-6i64..=6, 1i64..=4, prop::collection::vec(0..=max_deg, nvars)), 0..=max_terms).prop_map(
        move |ts| {
            let terms = ts
                .into_iter()
                .filter(|(_, _, e)| e.iter().sum::<u32>() <= max_deg)
                .map(|(n, d, e)| (rational(n, d), e));
            Poly::from_terms(nvars, terms).unwrap()
        },
    )
}

pub fn field(nvars: usize, max_deg: u32, max_terms: usize) -> impl Strategy<Value = Vec<Poly>> {
    prop::collection::vec(poly(nvars, max_deg, max_terms), nvars)
}

fn r(n: i64) -> Rational {
    rational(n, 1)
}

/// Planar affine involution `z -> P D P^-1 z + (I - S) c` with `D = diag(±1, ±1)`.
pub fn involution2() -> impl Strategy<Value = AffineInvolution> {
    (prop::array::uniform4(-3i64..=3), any::<(bool, bool)>(), prop::array::uniform2(-2i64..=2))
        .prop_filter("P invertible", |(p, _, _)| p[0] * p[3] - p[1] * p[2] != 0)
        .prop_map(|(p, (s0, s1), c)| {
            let det = rational(p[0] * p[3] - p[1] * p[2], 1);
            let pm = [[r(p[0]), r(p[1])], [r(p[2]), r(p[3])]];
            let inv = [[r(p[3]) / &det, r(-p[1]) / &det], [r(-p[2]) / &det, r(p[0]) / &det]];
            let d = [r(if s0 { 1 } else { -1 }), r(if s1 { 1 } else { -1 })];
            let mut s = vec![vec![r(0), r(0)], vec![r(0), r(0)]];
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        s[i][j] += &pm[i][k] * &d[k] * &inv[k][j];
                    }
                }
            }
            let c = [r(c[0]), r(c[1])];
            let b: Vec<Rational> = (0..2).map(|i| &c[i] - (&s[i][0] * &c[0] + &s[i][1] * &c[1])).collect();
            make_involution(s, b).unwrap()
        })
}

/// The involutions used by the displayed examples.
pub fn named_involution2() -> impl Strategy<Value = AffineInvolution> {
    prop_oneof![
        Just(AffineInvolution::reflect_axis(2, 0)),
        Just(AffineInvolution::reflect_axis(2, 1)),
        Just(AffineInvolution::point_reflection(2)),
        Just(AffineInvolution::swap(2, 0, 1)),
    ]
}
