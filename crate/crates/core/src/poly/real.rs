use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

/// Dense polynomial with real coefficients, stored in ascending powers.
///
/// Trailing zeros are trimmed on construction, so the zero polynomial is the
/// empty coefficient vector and [`RealPoly::degree`] returns `None` for it.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RealPoly {
    coeffs: Vec<f64>,
}

impl RealPoly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `c * y^k`
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// The identity polynomial `y`.
    pub fn identity() -> Self {
        Self::new(vec![0.0, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Degree, with `None` standing for the `-inf` degree of the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `y^k`; zero beyond the degree.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, x: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    /// `outer(inner(y))`, by Horner's scheme over polynomials.
    pub fn compose(&self, inner: &RealPoly) -> Self {
        self.coeffs
            .iter()
            .rev()
            .fold(RealPoly::zero(), |acc, &c| &(&acc * inner) + &RealPoly::constant(c))
    }

    /// `y -> p(1 - y)`.
    pub fn reflect(&self) -> Self {
        self.compose(&RealPoly::new(vec![1.0, -1.0]))
    }

    /// Multiply by `y^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![0.0; k];
        coeffs.extend_from_slice(&self.coeffs);
        Self::new(coeffs)
    }

    /// Largest coefficient-wise absolute difference.
    pub fn max_coeff_diff(&self, other: &RealPoly) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|k| (self.coeff(k) - other.coeff(k)).abs())
            .fold(0.0, f64::max)
    }
}

impl From<Vec<f64>> for RealPoly {
    fn from(coeffs: Vec<f64>) -> Self {
        Self::new(coeffs)
    }
}

impl Add for &RealPoly {
    type Output = RealPoly;

    fn add(self, rhs: &RealPoly) -> RealPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RealPoly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &RealPoly {
    type Output = RealPoly;

    fn sub(self, rhs: &RealPoly) -> RealPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RealPoly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &RealPoly {
    type Output = RealPoly;

    fn mul(self, rhs: &RealPoly) -> RealPoly {
        if self.is_zero() || rhs.is_zero() {
            return RealPoly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RealPoly::new(out)
    }
}

impl Neg for &RealPoly {
    type Output = RealPoly;

    fn neg(self) -> RealPoly {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for RealPoly {
            type Output = RealPoly;

            fn $method(self, rhs: RealPoly) -> RealPoly {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
