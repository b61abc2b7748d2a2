//! Maximally flat half-sample delay factor `D_L(z) = 1 + sum_l d(l) z^-l`.
//!
//! `e^{-i w L} D_L(e^{-i w}) / D_L(e^{i w})` approximates the half-sample
//! delay `e^{-i w / 2}` to order `2L + 1` at `w = 0`. The coefficients are
//! `d(l) = C(2L+1, 2l+1) / (2L+1)`, which also gives the closed form
//! `D_L(z) = z^-L [(1 + sqrt z)^{2L+1} + (1 - sqrt z)^{2L+1}] / (2(2L+1))`.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::poly::LaurentFilter;

pub const MAX_ORDER: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct ThiranFilter {
    order: usize,
    filter: LaurentFilter,
}

impl ThiranFilter {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn filter(&self) -> &LaurentFilter {
        &self.filter
    }

    pub fn coeffs(&self) -> &[f64] {
        self.filter.coeffs()
    }

    /// `D_L(e^{i omega})`.
    pub fn eval_unit(&self, omega: f64) -> Complex64 {
        self.filter.eval_unit(omega)
    }
}

fn check_order(order: usize) -> Result<()> {
    if order < 1 {
        return Err(Error::InvalidOrder {
            name: "L",
            value: order as i64,
            reason: "must be at least 1",
        });
    }
    if order > MAX_ORDER {
        return Err(Error::InvalidOrder {
            name: "L",
            value: order as i64,
            reason: "must not exceed 64",
        });
    }
    Ok(())
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// Exact coefficients `d(0..=L)` as rationals.
pub fn exact_coeffs(order: usize) -> Result<Vec<BigRational>> {
    check_order(order)?;
    let n = 2 * order as u64 + 1;
    let den = BigInt::from(n);
    Ok((0..=order as u64)
        .map(|l| BigRational::new(BigInt::from(binomial(n, 2 * l + 1)), den.clone()))
        .collect())
}

/// `D_L` with coefficients from integer binomials, `d(L - n) = C(2L+1, 2n)/(2L+1)`.
pub fn thiran_coeffs(order: usize) -> Result<ThiranFilter> {
    check_order(order)?;
    let n = 2 * order as u64 + 1;
    let coeffs = (0..=order as u64)
        .map(|l| {
            let b = binomial(n, 2 * l + 1).to_f64().expect("binomial fits in f64");
            b / n as f64
        })
        .collect();
    Ok(ThiranFilter {
        order,
        filter: LaurentFilter::causal(coeffs),
    })
}

/// Coefficients from the running product
/// `d(l) = (-1)^l C(L,l) prod_{k<l} (1/2 - L + k)/(3/2 + k)`.
///
/// Kept as an independent cross-check on [`thiran_coeffs`].
pub fn thiran_product_coeffs(order: usize) -> Result<Vec<f64>> {
    check_order(order)?;
    let big_l = order as f64;
    let mut out = vec![1.0];
    let mut binom = 1.0;
    let mut prod = 1.0;
    for l in 1..=order {
        let k = (l - 1) as f64;
        binom *= (big_l - k) / (k + 1.0);
        prod *= (0.5 - big_l + k) / (1.5 + k);
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        out.push(sign * binom * prod);
    }
    Ok(out)
}

fn closed_form(order: usize, z: Complex64, w: Complex64) -> Complex64 {
    let p = 2 * order as i32 + 1;
    let one = Complex64::new(1.0, 0.0);
    let bracket = (one + w).powi(p) + (one - w).powi(p);
    bracket * z.powi(-(order as i32)) / (2.0 * (2 * order + 1) as f64)
}

/// Closed-form `D_L(z)`; either square-root branch gives the same value.
pub fn thiran_closed_eval(order: usize, z: Complex64) -> Result<Complex64> {
    check_order(order)?;
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroArgument);
    }
    let w = z.sqrt();
    let value = closed_form(order, z, w);
    debug_assert!({
        let other = closed_form(order, z, -w);
        (value - other).norm() <= 1e-9 * value.norm().max(1.0)
    });
    Ok(value)
}

/// `e^{-i omega L} D_L(e^{-i omega}) / D_L(e^{i omega})`, a unit-modulus number.
pub fn thiran_ratio_phase(order: usize, omega: f64) -> Result<Complex64> {
    let d = thiran_coeffs(order)?;
    let v = d.eval_unit(omega);
    Ok(Complex64::from_polar(1.0, -omega * order as f64) * v.conj() / v)
}

/// `|thiran_ratio_phase(L, omega) - e^{-i omega / 2}|` evaluated without
/// cancellation.
///
/// The numerator of the difference is `2 |sum_l d(l) sin(omega (l - c))|`
/// with `c = (2L - 1)/4`. Its odd moments `sum_l d(l) (l - c)^m` vanish
/// exactly for `m < 2L + 1`, so for small `omega` the sine sum is expanded in
/// a power series whose coefficients are computed in exact arithmetic and
/// whose leading terms are identically zero.
pub fn thiran_flatness_defect(order: usize, omega: f64) -> Result<f64> {
    let exact = exact_coeffs(order)?;
    let d = thiran_coeffs(order)?;
    let center = BigRational::new(BigInt::from(2 * order as i64 - 1), BigInt::from(4));
    let spread = order as f64;
    let sine_sum = if omega.abs() * spread <= 1.0 {
        // series in omega; terms with (2k+1) < 2L+1 have zero coefficient
        let shifted: Vec<BigRational> = (0..=order)
            .map(|l| BigRational::from_integer(BigInt::from(l)) - &center)
            .collect();
        let mut sum = 0.0;
        let mut k = 0usize;
        loop {
            let m = 2 * k + 1;
            let moment: BigRational = exact
                .iter()
                .zip(&shifted)
                .map(|(dl, x)| dl * num_traits::pow(x.clone(), m))
                .fold(BigRational::zero(), |a, b| a + b);
            let coeff = moment.to_f64().unwrap_or(0.0);
            let mut term = omega.powi(m as i32) * coeff;
            for j in 1..=m {
                term /= j as f64;
            }
            if k % 2 == 1 {
                term = -term;
            }
            sum += term;
            if m >= 2 * order + 1 && (term.abs() <= 1e-18 * sum.abs() || m > 2 * order + 60) {
                break;
            }
            k += 1;
        }
        sum
    } else {
        let c = (2.0 * spread - 1.0) / 4.0;
        d.coeffs()
            .iter()
            .enumerate()
            .map(|(l, dl)| dl * (omega * (l as f64 - c)).sin())
            .sum()
    };
    Ok(2.0 * sine_sum.abs() / d.eval_unit(omega).norm())
}
