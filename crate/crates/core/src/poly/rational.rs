use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::RealPoly;

/// Polynomial with exact rational coefficients, ascending powers, trimmed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RatPoly {
    coeffs: Vec<BigRational>,
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn leading(&self) -> BigRational {
        self.coeffs.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn compose(&self, inner: &RatPoly) -> Self {
        self.coeffs.iter().rev().fold(RatPoly::zero(), |acc, c| {
            &(&acc * inner) + &RatPoly::constant(c.clone())
        })
    }

    /// `y -> p(1 - y)`, exact.
    pub fn reflect(&self) -> Self {
        self.compose(&RatPoly::from_integers(&[1, -1]))
    }

    /// Euclidean division: `self = q * divisor + r` with `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &RatPoly) -> (RatPoly, RatPoly) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let dd = divisor.coeffs.len() - 1;
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (RatPoly::zero(), self.clone());
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] / &lead;
            if !c.is_zero() {
                for (j, d) in divisor.coeffs.iter().enumerate() {
                    rem[k + j] -= &c * d;
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (RatPoly::new(quot), RatPoly::new(rem))
    }

    /// Nearest-double image of every coefficient.
    pub fn to_real(&self) -> RealPoly {
        RealPoly::new(
            self.coeffs
                .iter()
                .map(|c| c.to_f64().unwrap_or(f64::NAN))
                .collect(),
        )
    }
}

/// Extended Euclid over `Q[y]`: returns `(u, v, g)` with `u*a + v*b = g`,
/// `g` the monic gcd.
///
/// Panics if both inputs are zero.
pub fn ext_euclid(a: &RatPoly, b: &RatPoly) -> (RatPoly, RatPoly, RatPoly) {
    assert!(
        !(a.is_zero() && b.is_zero()),
        "gcd of two zero polynomials is undefined"
    );
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (RatPoly::one(), RatPoly::zero());
    let (mut t0, mut t1) = (RatPoly::zero(), RatPoly::one());
    while !r1.is_zero() {
        let (q, r) = r0.div_rem(&r1);
        let s2 = &s0 - &(&q * &s1);
        let t2 = &t0 - &(&q * &t1);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    let inv = BigRational::one() / r0.leading();
    (s0.scale(&inv), t0.scale(&inv), r0.scale(&inv))
}

impl Add for &RatPoly {
    type Output = RatPoly;

    fn add(self, rhs: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RatPoly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &RatPoly {
    type Output = RatPoly;

    fn sub(self, rhs: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RatPoly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &RatPoly {
    type Output = RatPoly;

    fn mul(self, rhs: &RatPoly) -> RatPoly {
        if self.is_zero() || rhs.is_zero() {
            return RatPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RatPoly::new(out)
    }
}

impl Neg for &RatPoly {
    type Output = RatPoly;

    fn neg(self) -> RatPoly {
        RatPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_identity(a: &RatPoly, b: &RatPoly) -> (RatPoly, RatPoly, RatPoly) {
        let (u, v, g) = ext_euclid(a, b);
        let lhs = &(&u * a) + &(&v * b);
        assert_eq!(lhs, g, "u*a + v*b must equal g exactly");
        assert_eq!(g.leading(), BigRational::one());
        (u, v, g)
    }

    #[test]
    fn euclid_trivial() {
        let (u, v, g) = check_identity(&RatPoly::from_integers(&[0, 1]), &RatPoly::one());
        assert!(u.is_zero());
        assert_eq!(v, RatPoly::one());
        assert_eq!(g, RatPoly::one());
    }

    #[test]
    fn euclid_bezout_l1_m0() {
        // s(1-y) = 4 - 3y, s(y) = 1 + 3y
        let a = RatPoly::from_integers(&[4, -3]);
        let b = RatPoly::from_integers(&[1, 3]);
        let (u, v, g) = check_identity(&a, &b);
        assert_eq!(g, RatPoly::one());
        assert_eq!(u, RatPoly::constant(rat(1, 5)));
        assert_eq!(v, RatPoly::constant(rat(1, 5)));
        // rhs = 9/2 gives r = 9/10
        assert_eq!(v.scale(&rat(9, 2)), RatPoly::constant(rat(9, 10)));
    }

    #[test]
    fn euclid_common_factor() {
        let a = RatPoly::from_integers(&[1, 1]);
        let b = &a * &a;
        let (_, _, g) = check_identity(&a, &b);
        assert_eq!(g, a);
    }

    #[test]
    fn div_rem_reconstructs() {
        let a = RatPoly::from_integers(&[3, 0, -2, 7, 1]);
        let b = RatPoly::from_integers(&[1, 2, 5]);
        let (q, r) = a.div_rem(&b);
        assert!(r.degree().unwrap_or(0) < 2);
        assert_eq!(&(&q * &b) + &r, a);
    }

    #[test]
    fn reflect_is_involution() {
        let p = RatPoly::new(vec![rat(1, 3), rat(-7, 2), rat(5, 11)]);
        assert_eq!(p.reflect().reflect(), p);
    }
}
