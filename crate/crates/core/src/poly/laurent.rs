use num_complex::Complex64;

/// Two-sided FIR filter `A(z) = sum_k coeffs[k] * z^-(lo + k)`.
///
/// Exact zeros at either end are trimmed, so the first and last stored
/// coefficients are nonzero unless the filter is identically zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LaurentFilter {
    lo: i64,
    coeffs: Vec<f64>,
}

impl LaurentFilter {
    pub fn new(lo: i64, coeffs: Vec<f64>) -> Self {
        let first = coeffs.iter().position(|&c| c != 0.0);
        let last = coeffs.iter().rposition(|&c| c != 0.0);
        match (first, last) {
            (Some(a), Some(b)) => Self {
                lo: lo + a as i64,
                coeffs: coeffs[a..=b].to_vec(),
            },
            _ => Self::zero(),
        }
    }

    /// Causal filter starting at `z^0`.
    pub fn causal(coeffs: Vec<f64>) -> Self {
        Self::new(0, coeffs)
    }

    pub fn zero() -> Self {
        Self { lo: 0, coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest power of `z^-1` carried.
    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// Highest power of `z^-1` carried.
    pub fn hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Support length `hi - lo + 1`.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `z^-n`.
    pub fn coeff(&self, n: i64) -> f64 {
        let k = n - self.lo;
        if k < 0 {
            return 0.0;
        }
        self.coeffs.get(k as usize).copied().unwrap_or(0.0)
    }

    pub fn sum(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.lo, self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Multiply by `z^-k`.
    pub fn delay(&self, k: i64) -> Self {
        Self {
            lo: self.lo + k,
            coeffs: self.coeffs.clone(),
        }
    }

    pub fn mul(&self, other: &LaurentFilter) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(self.lo + other.lo, out)
    }

    pub fn add(&self, other: &LaurentFilter) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        Self::new(lo, (lo..=hi).map(|n| self.coeff(n) + other.coeff(n)).collect())
    }

    /// `A(1/z)`.
    pub fn reverse(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Self { lo: -self.hi(), coeffs }
    }

    /// `A(-z)`.
    pub fn negate_arg(&self) -> Self {
        Self::new(
            self.lo,
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| if (self.lo + k as i64) % 2 == 0 { c } else { -c })
                .collect(),
        )
    }

    /// Quadrature mirror `z^-1 A(-1/z)`.
    pub fn qmf(&self) -> Self {
        self.reverse().negate_arg().delay(1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let w = z.inv();
        let poly = self
            .coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * w + c);
        poly * w.powi(self.lo as i32)
    }

    /// `A(e^{i omega})`.
    pub fn eval_unit(&self, omega: f64) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        // z^-n = e^{-i n omega}
        let w = Complex64::from_polar(1.0, -omega);
        let poly = self
            .coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * w + c);
        poly * Complex64::from_polar(1.0, -omega * self.lo as f64)
    }

    /// `A(z) A(1/z)` as a symmetric filter.
    pub fn autocorrelation(&self) -> Self {
        self.mul(&self.reverse())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reverse_moves_support() {
        let a = LaurentFilter::new(1, vec![1.0]);
        let r = a.reverse();
        assert_eq!(r.lo(), -1);
        assert_eq!(r.coeffs(), &[1.0]);
    }

    #[test]
    fn thiran_l1_value_at_one() {
        let d1 = LaurentFilter::causal(vec![1.0, 1.0 / 3.0]);
        let v = d1.eval(Complex64::new(1.0, 0.0));
        assert!((v.re - 4.0 / 3.0).abs() < 1e-15 && v.im.abs() < 1e-15);
    }

    #[test]
    fn negate_arg_flips_odd_powers() {
        let d1 = LaurentFilter::causal(vec![1.0, 1.0 / 3.0]);
        assert_eq!(d1.negate_arg().coeffs(), &[1.0, -1.0 / 3.0]);
    }

    #[test]
    fn trimming_and_support_bookkeeping() {
        let a = LaurentFilter::new(-2, vec![0.0, 1.0, 2.0, 0.0]);
        assert_eq!((a.lo(), a.hi()), (-1, 0));
        let b = LaurentFilter::new(3, vec![1.0, -1.0]);
        let p = a.mul(&b);
        assert_eq!(p.lo(), a.lo() + b.lo());
        assert!(LaurentFilter::new(4, vec![0.0, 0.0]).is_zero());
    }

    #[test]
    fn qmf_of_haar() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = LaurentFilter::causal(vec![s, s]);
        let g = h.qmf();
        // z^-1 H(-1/z) = s z^-1 - s z^0
        assert_eq!(g.lo(), 0);
        assert_eq!(g.coeffs(), &[-s, s]);
    }

    #[test]
    fn eval_unit_matches_eval() {
        let a = LaurentFilter::new(-2, vec![0.3, -1.0, 2.5, 0.7]);
        for k in 0..16 {
            let om = 0.37 * k as f64;
            let z = Complex64::from_polar(1.0, om);
            assert!((a.eval(z) - a.eval_unit(om)).norm() < 1e-13);
        }
    }
}
