//! Values checked against independent computations: exact rational solves of
//! the Bezout identity by undetermined coefficients, and high-precision
//! spectral factorization.

#![allow(clippy::excessive_precision)]

use num_rational::BigRational;
use num_traits::ToPrimitive;

use hilbert_pair::bezout::{self, Method};
use hilbert_pair::factorize::{common_factor_residual, design, PhaseChoice};
use hilbert_pair::poly::RealPoly;
use hilbert_pair::spectral;
use hilbert_pair::thiran::{exact_coeffs, thiran_coeffs, thiran_product_coeffs};

fn q(n: i64, d: i64) -> f64 {
    n as f64 / d as f64
}

fn bezout_oracle() -> Vec<((usize, usize), Vec<f64>)> {
    vec![
        ((1, 1), vec![q(99, 160), q(-27, 80)]),
        ((2, 1), vec![q(2075, 11136), q(-2625, 14848), q(875, 22272)]),
        ((1, 2), vec![q(1269, 2560), q(-1683, 2560), q(297, 1280)]),
        (
            (2, 2),
            vec![q(3425, 22272), q(-194275, 712704), q(114125, 712704), q(-10375, 356352)],
        ),
        (
            (3, 2),
            vec![
                q(1358231, 40148992),
                q(-418215, 5537792),
                q(39724545, 642383872),
                q(-13392435, 642383872),
                q(704865, 321191936),
            ],
        ),
    ]
}

#[test]
fn thiran_low_orders() {
    assert_eq!(thiran_coeffs(1).unwrap().coeffs(), &[1.0, 1.0 / 3.0]);
    assert_eq!(thiran_coeffs(2).unwrap().coeffs(), &[1.0, 2.0, 0.2]);
    let d3: Vec<f64> = exact_coeffs(3)
        .unwrap()
        .iter()
        .map(|c| c.to_f64().unwrap())
        .collect();
    assert_eq!(d3, vec![1.0, 5.0, 3.0, 1.0 / 7.0]);
}

#[test]
fn thiran_product_form_agrees() {
    for l in 1..=20 {
        let a = thiran_coeffs(l).unwrap();
        let b = thiran_product_coeffs(l).unwrap();
        for (x, y) in a.coeffs().iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "L={l}: {x} vs {y}");
        }
    }
}

#[test]
fn exact_solution_matches_undetermined_coefficients() {
    for ((l, m), want) in bezout_oracle() {
        let r = bezout::solve_exact_rational(l, m).unwrap();
        assert_eq!(r.coeffs().len(), want.len(), "degree at ({l},{m})");
        for (c, w) in r.coeffs().iter().zip(&want) {
            let c: &BigRational = c;
            assert!((c.to_f64().unwrap() - w).abs() <= 1e-16 * w.abs(), "({l},{m})");
        }
    }
}

#[test]
fn every_method_matches_the_oracle() {
    for ((l, m), want) in bezout_oracle() {
        let want = RealPoly::new(want);
        for method in [Method::RecursiveInterp, Method::LinearSystem, Method::ExactRational] {
            let sol = bezout::solve(l, m, method).unwrap();
            let diff = sol.r.max_coeff_diff(&want) / want.max_abs_coeff();
            assert!(diff <= 1e-12, "({l},{m}) {method:?}: {diff:e}");
            assert!(sol.residual <= 1e-13 * bezout::rhs(l, m));
        }
    }
}

#[test]
fn residual_of_a_wrong_r_is_visible() {
    let (_, want) = bezout_oracle().remove(0);
    let mut bad = want.clone();
    bad[1] *= 1.001;
    let good = bezout::bezout_residual(&RealPoly::new(want), 1, 1);
    let bad = bezout::bezout_residual(&RealPoly::new(bad), 1, 1);
    assert!(good <= 1e-15);
    assert!(bad > 1e-4);
}

#[test]
fn lowpass_matches_high_precision_factorization() {
    let oracle: [((usize, usize), Vec<f64>); 2] = [
        (
            (1, 1),
            vec![
                0.658_468_361_008_762_15,
                0.749_819_539_559_498_03,
                0.048_638_420_177_785_373,
                -0.042_712_758_372_950_503,
            ],
        ),
        (
            (2, 2),
            vec![
                0.219_461_874_008_292_14,
                0.739_088_768_179_774_21,
                0.618_021_981_245_156_86,
                -0.069_489_155_365_403_830,
                -0.131_773_241_045_748_81,
                0.037_921_740_254_200_114,
                0.001_396_166_978_847_331_7,
                -0.000_414_571_882_022_974_62,
            ],
        ),
    ];
    for ((l, m), want) in oracle {
        let d = design(l, m, PhaseChoice::AllInsideUnitCircle, Method::RecursiveInterp).unwrap();
        assert_eq!(d.bank.h0.lo(), 0);
        for (x, y) in d.bank.h0.coeffs().iter().zip(&want) {
            assert!((x - y).abs() <= 1e-13, "({l},{m}): {x} vs {y}");
        }
    }
}

#[test]
fn g0_shares_the_reversed_factor() {
    for l in 1..=6 {
        let d = design(l, 2, PhaseChoice::AllInsideUnitCircle, Method::RecursiveInterp).unwrap();
        assert!(common_factor_residual(l, &d.bank.h0, &d.bank.g0).unwrap() <= 1e-10);
        let h = d.bank.h0.coeffs();
        let swapped = d.bank.g0.reverse().delay(h.len() as i64 - 1);
        if l > 1 {
            assert!(common_factor_residual(l, &d.bank.h0, &swapped).unwrap() > 1e-6);
        }
    }
}

#[test]
fn daubechies_regularity() {
    // db2 and db3 low-pass filters
    let s3 = 3f64.sqrt();
    let k = 1.0 / (4.0 * 2f64.sqrt());
    let db2 = [(1.0 + s3) * k, (3.0 + s3) * k, (3.0 - s3) * k, (1.0 - s3) * k];
    let h = hilbert_pair::poly::LaurentFilter::causal(db2.to_vec());
    let s = spectral::sobolev_exponent_of(&h, 2).unwrap();
    assert!((s - 1.0).abs() <= 1e-9, "db2 {s}");
}

#[test]
fn transition_radius_agrees_with_power_iteration() {
    for (l, m) in [(1, 1), (2, 3), (4, 4), (3, 6)] {
        let d = design(l, m, PhaseChoice::AllInsideUnitCircle, Method::RecursiveInterp).unwrap();
        let b = spectral::deflate_moments(&d.bank.h0, m).unwrap();
        let dense = spectral::transition_radius(&b).unwrap();
        let power = spectral::transition_radius_power(&b, 4000);
        assert!((dense - power).abs() <= 1e-6 * dense, "({l},{m}) {dense} vs {power}");
    }
}

#[test]
fn phase_choice_keeps_sobolev_exponent() {
    for (l, m) in [(2, 2), (3, 4), (5, 3)] {
        let a = design(l, m, PhaseChoice::AllInsideUnitCircle, Method::RecursiveInterp).unwrap();
        let b = design(l, m, PhaseChoice::AlternatingPairs, Method::RecursiveInterp).unwrap();
        let sa = spectral::sobolev_exponent(&a.bank).unwrap();
        let sb = spectral::sobolev_exponent(&b.bank).unwrap();
        assert!((sa - sb).abs() <= 1e-8);
    }
}
