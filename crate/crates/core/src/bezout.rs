//! The Bezout equation `B(L, M)`:
//!
//! `r(1-y) s(1-y) + r(y) s(y) = (2L+1)^2 2^{1-2L-2M}`,
//! `s(y) = y^M sum_n C(2L+1, 2n) y^n`,
//!
//! whose unique solution of degree at most `M + L - 1` determines the
//! autocorrelation `R(z) = r((2 + z + 1/z)/4)` of the free factor of a
//! perfect-reconstruction common-factor filter bank.
//!
//! Three solvers are provided: barycentric interpolation followed by a
//! recursion in `M` (the default), the half-band Toeplitz linear system,
//! and exact extended Euclid over the rationals (the oracle).

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::poly::{ext_euclid, poly_roots, RatPoly, RealPoly, DEFAULT_TOL};
use crate::thiran::{binomial, thiran_coeffs};

/// Relative residual tolerance (times the right-hand side) for the float solvers.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Residual tolerance for the float image of the exact solution.
pub const EXACT_RESIDUAL_TOL: f64 = 1e-12;
pub const CONDITION_LIMIT: f64 = 1e12;
pub const EXACT_COST_LIMIT: usize = 12;
pub const RESIDUAL_GRID: usize = 1025;
pub const POSITIVITY_GRID: usize = 4097;
/// Relative size below which the recursion's constant term counts as zero.
const RECURSION_DEFECT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    LinearSystem,
    RecursiveInterp,
    ExactRational,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::LinearSystem => "linear",
            Method::RecursiveInterp => "recursive",
            Method::ExactRational => "exact",
        }
    }

    pub fn from_label(label: &str) -> Option<Method> {
        match label {
            "linear" => Some(Method::LinearSystem),
            "recursive" => Some(Method::RecursiveInterp),
            "exact" => Some(Method::ExactRational),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BezoutProblem {
    pub order: usize,
    pub moments: usize,
    pub s: RealPoly,
    pub rhs: f64,
}

impl BezoutProblem {
    pub fn new(order: usize, moments: usize) -> Result<Self> {
        check_order(order)?;
        Ok(Self {
            order,
            moments,
            s: s_poly(order, moments),
            rhs: rhs(order, moments),
        })
    }
}

/// Solution of `B(L, M)`.
///
/// `r_reflected` holds the coefficients of `r(1 - y)`. Its coefficients are
/// positive and it stays small near `y = 0`, so it is the accurate form: `r`
/// itself has alternating coefficients up to `1e9` times `r(1)` for `L, M`
/// near 8 and cannot be rounded to doubles without losing the residual.
/// `r` is kept as a convenience view derived from `r_reflected`.
#[derive(Clone, Debug, PartialEq)]
pub struct BezoutSolution {
    pub r: RealPoly,
    pub r_reflected: RealPoly,
    pub method: Method,
    /// Max Bezout defect on the Chebyshev residual grid of `[0, 1]`.
    pub residual: f64,
}

fn check_order(order: usize) -> Result<()> {
    if order == 0 {
        return Err(Error::InvalidOrder {
            name: "L",
            value: 0,
            reason: "must be at least 1",
        });
    }
    Ok(())
}

/// `(2L+1)^2 2^{1-2L-2M}`.
pub fn rhs(order: usize, moments: usize) -> f64 {
    let n = (2 * order + 1) as f64;
    n * n * 2f64.powi(1 - 2 * order as i32 - 2 * moments as i32)
}

pub fn rhs_exact(order: usize, moments: usize) -> BigRational {
    let n = BigInt::from(2 * order + 1);
    let den = num_traits::pow(BigInt::from(2), 2 * order + 2 * moments - 1);
    BigRational::new(&n * &n, den)
}

fn s_integer_coeffs(order: usize) -> Vec<BigInt> {
    let n = 2 * order as u64 + 1;
    (0..=order as u64)
        .map(|k| BigInt::from(binomial(n, 2 * k)))
        .collect()
}

/// `s_{L,M}(y) = y^M sum_{n=0}^{L} C(2L+1, 2n) y^n`.
pub fn s_poly(order: usize, moments: usize) -> RealPoly {
    let base: Vec<f64> = s_integer_coeffs(order)
        .iter()
        .map(|c| c.to_f64().expect("binomial fits in f64"))
        .collect();
    RealPoly::new(base).shift_up(moments)
}

pub fn s_poly_exact(order: usize, moments: usize) -> RatPoly {
    let mut coeffs = vec![BigRational::from_integer(BigInt::from(0)); moments];
    coeffs.extend(s_integer_coeffs(order).into_iter().map(BigRational::from_integer));
    RatPoly::new(coeffs)
}

/// The `L` roots `-tan^2(pi (2k+1) / (2(2L+1)))` of `s_{L,0}`, strictly decreasing.
pub fn s_roots(order: usize) -> Vec<f64> {
    let den = 2.0 * (2 * order + 1) as f64;
    (0..order)
        .map(|k| -(PI * (2 * k + 1) as f64 / den).tan().powi(2))
        .collect()
}

/// Chebyshev–Lobatto points mapped to `[0, 1]`, endpoints included.
pub fn chebyshev_grid(n: usize) -> Vec<f64> {
    let last = (n - 1) as f64;
    (0..n)
        .map(|j| 0.5 * (1.0 - (PI * j as f64 / last).cos()))
        .collect()
}

/// Max of `|r(1-y) s(1-y) + r(y) s(y) - rhs|` over the Chebyshev grid.
pub fn bezout_residual(r: &RealPoly, order: usize, moments: usize) -> f64 {
    let s = s_poly(order, moments);
    let target = rhs(order, moments);
    chebyshev_grid(RESIDUAL_GRID)
        .into_iter()
        .map(|y| (r.eval(1.0 - y) * s.eval(1.0 - y) + r.eval(y) * s.eval(y) - target).abs())
        .fold(0.0, f64::max)
}

/// The same residual for a solution given as `rt(y) = r(1 - y)`.
pub fn bezout_residual_reflected(rt: &RealPoly, order: usize, moments: usize) -> f64 {
    let s = s_poly(order, moments);
    let target = rhs(order, moments);
    chebyshev_grid(RESIDUAL_GRID)
        .into_iter()
        .map(|y| (rt.eval(y) * s.eval(1.0 - y) + rt.eval(1.0 - y) * s.eval(y) - target).abs())
        .fold(0.0, f64::max)
}

/// `q(1 - y) = -q(y)` coefficient-wise to `1e-12`.
pub fn antisymmetry_check(q: &RealPoly) -> bool {
    (&q.reflect() + q).max_abs_coeff() <= 1e-12
}

fn finish(
    r_reflected: RealPoly,
    method: Method,
    order: usize,
    moments: usize,
    tol: f64,
) -> Result<BezoutSolution> {
    let residual = bezout_residual_reflected(&r_reflected, order, moments);
    let tolerance = tol * rhs(order, moments);
    if !(residual <= tolerance) {
        return Err(Error::ResidualExceeded { residual, tolerance });
    }
    Ok(BezoutSolution {
        r: r_reflected.reflect(),
        r_reflected,
        method,
        residual,
    })
}

/// `r_{L,0}(1 - t)` by Lagrange interpolation. In `y` the nodes are
/// `1 - y_k`, where `s_{L,0}(1 - y)` vanishes and the equation reduces to
/// `r s = rhs`; in `t = 1 - y` they are the roots `y_k` themselves, and every
/// node factor `y_m - t` has coefficients of one sign.
fn interpolate_base(order: usize) -> RealPoly {
    let roots = s_roots(order);
    let s0 = s_poly(order, 0);
    let target = rhs(order, 0);
    let mut out = RealPoly::zero();
    for (k, yk) in roots.iter().enumerate() {
        let others = || roots.iter().enumerate().filter(move |&(m, _)| m != k).map(|(_, y)| *y);
        let weight = others().map(|ym| ym - yk).product::<f64>().recip();
        let value = target / s0.eval(1.0 - yk);
        let basis = others().fold(RealPoly::constant(1.0), |acc, ym| {
            &acc * &RealPoly::new(vec![ym, -1.0])
        });
        out = &out + &basis.scale(value * weight);
    }
    out
}

/// One step `r_{L,M-1} -> r_{L,M}` of
/// `4 y r_{L,M}(y) = r_{L,M-1}(y) - 2^{-2L} r_{L,M-1}(0) (1 - 2y) s_{L,M-1}(1 - y)`,
/// carried out on `rt(t) = r(1 - t)`:
/// `4 (1 - t) rt_{L,M}(t) = rt_{L,M-1}(t) - 2^{-2L} rt_{L,M-1}(1) (2t - 1) s_{L,M-1}(t)`.
fn recursion_step(prev: &RealPoly, order: usize, step: usize) -> Result<RealPoly> {
    let correction = (&RealPoly::new(vec![-1.0, 2.0]) * &s_poly(order, step - 1))
        .scale(2f64.powi(-2 * order as i32) * prev.eval(1.0));
    let numerator = prev - &correction;
    // divide by (1 - t): quotient coefficients are running sums from the bottom
    let coeffs = numerator.coeffs();
    let mut quotient = Vec::with_capacity(coeffs.len().saturating_sub(1));
    let mut acc = 0.0;
    for c in &coeffs[..coeffs.len().saturating_sub(1)] {
        acc += c;
        quotient.push(acc / 4.0);
    }
    let constant = acc + coeffs.last().copied().unwrap_or(0.0);
    let limit = RECURSION_DEFECT_TOL * coeffs.iter().map(|c| c.abs()).sum::<f64>();
    if constant.abs() > limit {
        return Err(Error::RecursionDefect { step, constant, limit });
    }
    Ok(RealPoly::new(quotient))
}

pub fn solve_recursive(order: usize, moments: usize) -> Result<BezoutSolution> {
    check_order(order)?;
    let mut r = interpolate_base(order);
    for step in 1..=moments {
        r = recursion_step(&r, order, step)?;
    }
    finish(r, Method::RecursiveInterp, order, moments, RESIDUAL_TOL)
}

/// Exact minimal-degree solution via extended Euclid on `s(1-y)`, `s(y)`.
pub fn solve_exact_rational(order: usize, moments: usize) -> Result<RatPoly> {
    check_order(order)?;
    if order + moments > EXACT_COST_LIMIT {
        return Err(Error::CostGuard {
            order_sum: order + moments,
            limit: EXACT_COST_LIMIT,
        });
    }
    let s = s_poly_exact(order, moments);
    let s_reflected = s.reflect();
    let (u, v, g) = ext_euclid(&s_reflected, &s);
    debug_assert_eq!(g, RatPoly::one());
    let target = rhs_exact(order, moments);
    let r = v.scale(&target);
    debug_assert_eq!(r.reflect(), u.scale(&target));
    Ok(r)
}

pub fn solve_exact(order: usize, moments: usize) -> Result<BezoutSolution> {
    let r = solve_exact_rational(order, moments)?;
    finish(r.reflect().to_real(), Method::ExactRational, order, moments, EXACT_RESIDUAL_TOL)
}

/// Result of the half-band Toeplitz solve, before mapping to the `y` variable.
#[derive(Clone, Debug)]
pub struct LinearSystemDiagnostics {
    /// Coefficients of `R(z)` for powers `-(M+L-1) ..= M+L-1`.
    pub autocorrelation: Vec<f64>,
    /// 1-norm condition estimate of the even-row matrix.
    pub condition: f64,
}

/// Assemble and solve `C r = b`, where `C` keeps the rows of the convolution
/// matrix of `s = s1 * s2` that produce even powers of `s * r`, and `b`
/// requests a unit centre tap.
pub fn linear_system(order: usize, moments: usize) -> Result<LinearSystemDiagnostics> {
    check_order(order)?;
    if moments == 0 {
        return Err(Error::InvalidOrder {
            name: "M",
            value: 0,
            reason: "the linear-system method needs at least one vanishing moment",
        });
    }
    let d = thiran_coeffs(order)?;
    let s2 = d.filter().autocorrelation();
    let s1: Vec<f64> = (0..=2 * moments as u64)
        .map(|k| binomial(2 * moments as u64, k).to_f64().expect("binomial fits"))
        .collect();
    let s = crate::poly::LaurentFilter::causal(s1).mul(&crate::poly::LaurentFilter::causal(s2.coeffs().to_vec()));
    let taps = s.coeffs();
    let span = 2 * (moments + order);
    debug_assert_eq!(taps.len(), span + 1);
    let n = span - 1;
    let c = DMatrix::from_fn(n, n, |m, j| {
        let idx = (2 * m + 1) as i64 - j as i64;
        if (0..=span as i64).contains(&idx) {
            taps[idx as usize]
        } else {
            0.0
        }
    });
    let mut b = DVector::zeros(n);
    b[moments + order - 1] = 1.0;

    let lu = c.clone().lu();
    let inverse = lu
        .try_inverse()
        .ok_or(Error::IllConditioned { condition: f64::INFINITY, limit: CONDITION_LIMIT })?;
    let condition = one_norm(&c) * one_norm(&inverse);
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::IllConditioned { condition, limit: CONDITION_LIMIT });
    }
    let solution = c
        .lu()
        .solve(&b)
        .ok_or(Error::IllConditioned { condition: f64::INFINITY, limit: CONDITION_LIMIT })?;
    Ok(LinearSystemDiagnostics {
        autocorrelation: solution.iter().copied().collect(),
        condition,
    })
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Rewrite a symmetric Laurent sequence (centre index `half`) as `r(y)` with
/// `y = (2 + z + 1/z)/4`, using `z^k + z^-k = 2 T_k(2y - 1)`.
pub fn symmetric_to_y(taps: &[f64]) -> RealPoly {
    chebyshev_expand(taps, RealPoly::new(vec![-1.0, 2.0]))
}

/// As [`symmetric_to_y`] but returns `r(1 - y)`.
pub fn symmetric_to_reflected(taps: &[f64]) -> RealPoly {
    chebyshev_expand(taps, RealPoly::new(vec![1.0, -2.0]))
}

fn chebyshev_expand(taps: &[f64], u: RealPoly) -> RealPoly {
    let half = taps.len() / 2;
    let mut t_prev = RealPoly::constant(1.0);
    let mut t_cur = u.clone();
    let mut out = RealPoly::constant(taps[half]);
    for k in 1..=half {
        let a = 0.5 * (taps[half + k] + taps[half - k]);
        out = &out + &t_cur.scale(2.0 * a);
        let t_next = &(&u * &t_cur).scale(2.0) - &t_prev;
        t_prev = std::mem::replace(&mut t_cur, t_next);
    }
    out
}

pub fn solve_linear_system(order: usize, moments: usize) -> Result<BezoutSolution> {
    let diag = linear_system(order, moments)?;
    let rt = symmetric_to_reflected(&diag.autocorrelation);
    finish(rt, Method::LinearSystem, order, moments, RESIDUAL_TOL)
}

pub fn solve(order: usize, moments: usize, method: Method) -> Result<BezoutSolution> {
    match method {
        Method::RecursiveInterp => solve_recursive(order, moments),
        Method::LinearSystem => solve_linear_system(order, moments),
        Method::ExactRational => solve_exact(order, moments),
    }
}

/// Smallest value of `r` on `[0, 1]`, searched on a uniform grid and at the
/// real critical points of `r`. Returns `(argmin, min)`.
pub fn positivity_minimum(r: &RealPoly) -> (f64, f64) {
    let last = (POSITIVITY_GRID - 1) as f64;
    let mut best = (0.0, r.eval(0.0));
    let mut consider = |y: f64| {
        let v = r.eval(y);
        if v < best.1 {
            best = (y, v);
        }
    };
    for j in 0..POSITIVITY_GRID {
        consider(j as f64 / last);
    }
    let dr = r.derivative();
    if dr.degree().is_some_and(|d| d >= 1) {
        if let Ok(crit) = poly_roots(&dr, DEFAULT_TOL) {
            for y in crit.real_roots() {
                if (0.0..=1.0).contains(&y) {
                    consider(y);
                }
            }
        }
    }
    best
}
