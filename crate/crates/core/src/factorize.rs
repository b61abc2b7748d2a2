//! Spectral factorization of `R(z) = r((2 + z + 1/z)/4)` and assembly of the
//! common-factor filter bank
//!
//! `H0 = F D_L`, `G0 = F D_L(1/z) z^-L`, `F = Q (1 + 1/z)^M`,
//! `H1(z) = z^-1 H0(-1/z)`, `G1(z) = z^-1 G0(-1/z)`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::bezout::{self, BezoutSolution, Method};
use crate::error::{Error, Result};
use crate::poly::{poly_roots, LaurentFilter, RealPoly, DEFAULT_TOL};
use crate::thiran::{thiran_coeffs, thiran_flatness_defect};

pub const PR_GRID: usize = 4096;
/// Largest accepted `|z z' - 1|` when matching reciprocal roots.
pub const PAIRING_TOL: f64 = 1e-6;
/// Samples of the log-log slope fits, log-spaced on `[1e-3, 1e-1]`.
pub const SLOPE_SAMPLES: usize = 48;
pub const SLOPE_RANGE: (f64, f64) = (1e-3, 1e-1);

/// Which member of each reciprocal root pair goes into `Q`.
///
/// The labels follow the naming used for these wavelets in the literature:
/// taking every root inside the unit circle is called "mid" phase, even
/// though that is the usual minimum-phase choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PhaseChoice {
    AllInsideUnitCircle,
    AlternatingPairs,
}

impl PhaseChoice {
    pub fn label(self) -> &'static str {
        match self {
            PhaseChoice::AllInsideUnitCircle => "mid",
            PhaseChoice::AlternatingPairs => "min",
        }
    }

    pub fn from_label(label: &str) -> Option<PhaseChoice> {
        match label {
            "mid" => Some(PhaseChoice::AllInsideUnitCircle),
            "min" => Some(PhaseChoice::AlternatingPairs),
            _ => None,
        }
    }
}

impl fmt::Display for PhaseChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterBank {
    pub order: usize,
    pub moments: usize,
    pub phase: PhaseChoice,
    pub h0: LaurentFilter,
    pub g0: LaurentFilter,
    pub h1: LaurentFilter,
    pub g1: LaurentFilter,
    /// Coefficients of `Q` in powers of `z^-1`.
    pub q_poly: RealPoly,
}

/// A designed bank together with the Bezout solution it came from.
#[derive(Clone, Debug)]
pub struct Design {
    pub bank: FilterBank,
    pub solution: BezoutSolution,
}

/// `R(z) = r((2 + z + 1/z)/4)`.
pub fn lift_to_circle(r: &RealPoly) -> LaurentFilter {
    lift(r, LaurentFilter::new(-1, vec![0.25, 0.5, 0.25]))
}

/// `R(z)` from `rt(y) = r(1 - y)`, i.e. `rt((2 - z - 1/z)/4)`.
pub fn lift_reflected_to_circle(rt: &RealPoly) -> LaurentFilter {
    lift(rt, LaurentFilter::new(-1, vec![-0.25, 0.5, -0.25]))
}

fn lift(p: &RealPoly, x: LaurentFilter) -> LaurentFilter {
    p.coeffs().iter().rev().fold(LaurentFilter::zero(), |acc, &c| {
        acc.mul(&x).add(&LaurentFilter::causal(vec![c]))
    })
}

/// The two solutions of `z^2 - (2 - 4t) z + 1 = 0`, i.e. the `z` images of the
/// point `y = 1 - t`. The first has modulus at most one.
pub fn reciprocal_pair(t: Complex64) -> (Complex64, Complex64) {
    let b = Complex64::new(2.0, 0.0) - 4.0 * t;
    let disc = (b * b - 4.0).sqrt();
    // pick the sign that avoids cancellation
    let big = if (b + disc).norm() >= (b - disc).norm() {
        (b + disc) * 0.5
    } else {
        (b - disc) * 0.5
    };
    (big.inv(), big)
}

/// Match a root multiset into reciprocal pairs `(inside, outside)`, greedily
/// by `|z z' - 1|` after sorting by modulus.
pub fn pair_reciprocals(roots: &[Complex64]) -> Result<Vec<(Complex64, Complex64)>> {
    if roots.len() % 2 != 0 {
        return Err(Error::ConjugatePairingFailure(format!(
            "{} roots cannot form reciprocal pairs",
            roots.len()
        )));
    }
    let mut pool: Vec<Complex64> = roots.to_vec();
    pool.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let mut out = Vec::with_capacity(pool.len() / 2);
    while !pool.is_empty() {
        let z = pool.remove(0);
        let (idx, err) = pool
            .iter()
            .enumerate()
            .map(|(i, w)| (i, (z * w - 1.0).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("even count leaves a partner");
        if err > PAIRING_TOL {
            return Err(Error::ConjugatePairingFailure(format!(
                "no reciprocal partner for {z} (best |z z' - 1| = {err:e})"
            )));
        }
        out.push((z, pool.remove(idx)));
    }
    Ok(out)
}

/// Riesz factor `Q` with `Q(z) Q(1/z) = R(z)`, `Q(1) > 0`, causal.
pub fn riesz_factor(r: &RealPoly, phase: PhaseChoice) -> Result<LaurentFilter> {
    riesz_factor_reflected(&r.reflect(), phase)
}

/// As [`riesz_factor`] but from `rt(y) = r(1 - y)`, the accurate form kept by
/// [`BezoutSolution`].
pub fn riesz_factor_reflected(rt: &RealPoly, phase: PhaseChoice) -> Result<LaurentFilter> {
    let (t_min, value) = bezout::positivity_minimum(rt);
    if !(value >= 0.0) {
        return Err(Error::NotNonnegative { y: 1.0 - t_min, value });
    }
    let target = rt.eval(0.0).sqrt();
    if rt.degree().unwrap_or(0) == 0 {
        return Ok(LaurentFilter::causal(vec![target]));
    }
    let t_roots = poly_roots(rt, DEFAULT_TOL)?;

    // one group per real root or conjugate pair of roots
    let mut groups: Vec<Vec<(Complex64, Complex64)>> = Vec::new();
    let mut upper: Vec<(Complex64, Complex64)> = Vec::new();
    for &t in t_roots.roots() {
        let pair = reciprocal_pair(t);
        if t.im == 0.0 {
            groups.push(vec![pair]);
        } else if t.im > 0.0 {
            upper.push(pair);
        }
    }
    for &t in t_roots.roots().iter().filter(|t| t.im < 0.0) {
        let pair = reciprocal_pair(t);
        let idx = upper
            .iter()
            .position(|(a, _)| (a.conj() - pair.0).norm() <= 1e-9 * (1.0 + a.norm()))
            .ok_or_else(|| Error::ConjugatePairingFailure(format!("no conjugate for root {t}")))?;
        let partner = upper.swap_remove(idx);
        groups.push(vec![partner, pair]);
    }
    if !upper.is_empty() {
        return Err(Error::ConjugatePairingFailure(format!(
            "{} roots above the axis have no conjugate",
            upper.len()
        )));
    }

    let chosen: Vec<Complex64> = match phase {
        PhaseChoice::AllInsideUnitCircle => groups.iter().flatten().map(|p| p.0).collect(),
        PhaseChoice::AlternatingPairs => {
            let key = |g: &Vec<(Complex64, Complex64)>| g[0].0.arg().abs();
            groups.sort_by(|a, b| key(a).total_cmp(&key(b)));
            groups
                .iter()
                .enumerate()
                .flat_map(|(k, g)| g.iter().map(move |p| if k % 2 == 0 { p.0 } else { p.1 }))
                .collect()
        }
    };

    // prod (1 - a z^-1)
    let mut acc = vec![Complex64::new(1.0, 0.0)];
    for a in &chosen {
        let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
        for (k, c) in acc.iter().enumerate() {
            next[k] += c;
            next[k + 1] -= c * a;
        }
        acc = next;
    }
    let coeffs: Vec<f64> = acc.iter().map(|c| c.re).collect();
    let at_one: f64 = coeffs.iter().sum();
    Ok(LaurentFilter::causal(coeffs).scale(target / at_one))
}

/// Build the bank from a Riesz factor `Q`.
pub fn assemble_bank(
    order: usize,
    moments: usize,
    phase: PhaseChoice,
    q: &LaurentFilter,
) -> Result<FilterBank> {
    let d = thiran_coeffs(order)?;
    let binom = (0..moments).fold(LaurentFilter::causal(vec![1.0]), |acc, _| {
        acc.mul(&LaurentFilter::causal(vec![1.0, 1.0]))
    });
    let f = q.mul(&binom);
    let wanted = SQRT_2 * (2 * order + 1) as f64 * 4f64.powi(-(order as i32));
    let f = f.scale(wanted / f.sum());
    let h0 = f.mul(d.filter());
    let g0 = f.mul(&d.filter().reverse()).delay(order as i64);
    Ok(FilterBank {
        order,
        moments,
        phase,
        h1: h0.qmf(),
        g1: g0.qmf(),
        h0,
        g0,
        q_poly: RealPoly::new(q.coeffs().to_vec()),
    })
}

/// Solve `B(L, M)`, factor, and assemble.
pub fn design(order: usize, moments: usize, phase: PhaseChoice, method: Method) -> Result<Design> {
    if moments == 0 {
        return Err(Error::InvalidOrder {
            name: "M",
            value: 0,
            reason: "must be at least 1",
        });
    }
    let solution = bezout::solve(order, moments, method)?;
    let q = riesz_factor_reflected(&solution.r_reflected, phase)?;
    let bank = assemble_bank(order, moments, phase, &q)?;
    Ok(Design { bank, solution })
}

/// Half-band defect of one low-pass filter: the larger of the circle defect
/// `max |A(e^{iw})|^2 + |A(-e^{iw})|^2 - 2` and the coefficient defect of its
/// autocorrelation (even lags zero except lag 0, which must be 1 so that
/// `A(z)A(1/z) + A(-z)A(-1/z) = 2`).
pub fn half_band_defect(a: &LaurentFilter) -> f64 {
    let auto = a.autocorrelation();
    let coeff = (auto.lo()..=auto.hi())
        .filter(|n| n % 2 == 0)
        .map(|n| (auto.coeff(n) - if n == 0 { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    // |A(e^{iw})|^2 + |A(-e^{iw})|^2 = 2 sum_{k even} a_k e^{-ikw}
    let even: Vec<(f64, f64)> = (1..=auto.hi())
        .filter(|k| k % 2 == 0)
        .map(|k| (k as f64, auto.coeff(k)))
        .collect();
    let centre = auto.coeff(0);
    let circle = (0..PR_GRID)
        .map(|j| {
            let om = 2.0 * PI * j as f64 / PR_GRID as f64;
            let wave: f64 = even.iter().map(|&(k, c)| 2.0 * c * (k * om).cos()).sum();
            (2.0 * (centre + wave) - 2.0).abs()
        })
        .fold(0.0, f64::max);
    circle.max(coeff)
}

/// Largest PR defect over the `H` and `G` branches.
pub fn verify_pr(bank: &FilterBank) -> f64 {
    half_band_defect(&bank.h0).max(half_band_defect(&bank.g0))
}

/// Least-squares slope of `log value` against `log x`, keeping only samples
/// that stand clear of the rounding floor `noise`. Needs six usable points
/// over at least a quarter decade.
pub fn loglog_slope(samples: &[(f64, f64)], noise: f64) -> Result<f64> {
    fit_slope(samples, noise, false)
}

/// As [`loglog_slope`] with an extra `x^2` term in the model
/// `log value = s log x + b + a x^2`, for quantities of the form
/// `c x^s (1 + a x^2 + ...)`. Returns `s`.
pub fn loglog_slope_even(samples: &[(f64, f64)], noise: f64) -> Result<f64> {
    fit_slope(samples, noise, true)
}

fn fit_slope(samples: &[(f64, f64)], noise: f64, even: bool) -> Result<f64> {
    let usable: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, v)| v.is_finite() && *v > 1e3 * noise)
        .copied()
        .collect();
    let span = match (usable.first(), usable.last()) {
        (Some(a), Some(b)) => (b.0 / a.0).log10().abs(),
        _ => 0.0,
    };
    if usable.len() < 6 || span < 0.25 {
        return Err(Error::DegenerateFit {
            usable: usable.len(),
            total: samples.len(),
        });
    }
    let cols = if even { 3 } else { 2 };
    let design = DMatrix::from_fn(usable.len(), cols, |i, j| match j {
        0 => usable[i].0.ln(),
        1 => 1.0,
        _ => usable[i].0 * usable[i].0,
    });
    let rhs = DVector::from_iterator(usable.len(), usable.iter().map(|p| p.1.ln()));
    let coef = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|_| Error::DegenerateFit {
            usable: usable.len(),
            total: samples.len(),
        })?;
    Ok(coef[0])
}

fn slope_grid() -> Vec<f64> {
    let (a, b) = SLOPE_RANGE;
    let last = (SLOPE_SAMPLES - 1) as f64;
    (0..SLOPE_SAMPLES)
        .map(|k| a * (b / a).powf(k as f64 / last))
        .collect()
}

fn abs_sum(a: &LaurentFilter) -> f64 {
    a.coeffs().iter().map(|c| c.abs()).sum()
}

/// Relative size of `g0 - F D_L(1/z) z^-L` (with `F = h0 / D_L`) below which a
/// pair counts as built on the common factor.
pub const STRUCTURE_TOL: f64 = 1e-10;

/// Split `h0 = F D_L` and measure how far `g0` is from `F D_L(1/z) z^-L`,
/// relative to the coefficient mass of `g0`.
pub fn common_factor_residual(order: usize, h0: &LaurentFilter, g0: &LaurentFilter) -> Result<f64> {
    let d = thiran_coeffs(order)?;
    let dc = d.coeffs();
    let h = h0.coeffs();
    if h.len() <= order {
        return Ok(f64::INFINITY);
    }
    // D_L does not vanish on the unit circle, so the convolution matrix is
    // well conditioned and F follows by least squares
    let n = h.len() - order;
    let conv = DMatrix::from_fn(h.len(), n, |i, j| {
        if i >= j && i - j <= order {
            dc[i - j]
        } else {
            0.0
        }
    });
    let Ok(f) = conv.svd(true, true).solve(&DVector::from_column_slice(h), 1e-15) else {
        return Ok(f64::INFINITY);
    };
    let f: Vec<f64> = f.iter().copied().collect();
    let f = LaurentFilter::new(h0.lo(), f);
    let h_err = f.mul(d.filter()).add(&h0.scale(-1.0));
    let g_err = f.mul(&d.filter().reverse()).delay(order as i64).add(&g0.scale(-1.0));
    let worst = |e: &LaurentFilter| e.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
    Ok(worst(&h_err).max(worst(&g_err)) / abs_sum(g0).max(f64::MIN_POSITIVE))
}

/// Slope of `log |G0(e^{iw}) - H0(e^{iw}) e^{-iw/2}|` against `log w`.
///
/// When the pair is built on the common factor (see [`common_factor_residual`]),
/// the defect equals `|H0(e^{iw})|` times the flatness defect of `D_L`, which is
/// evaluated without cancellation. Otherwise it is evaluated directly and the
/// fit skips samples at the rounding floor; a defect that underflows everywhere
/// gives [`Error::DegenerateFit`].
pub fn hilbert_order_check(bank: &FilterBank) -> Result<f64> {
    hilbert_slope(bank.order, &bank.h0, &bank.g0)
}

pub fn hilbert_slope(order: usize, h0: &LaurentFilter, g0: &LaurentFilter) -> Result<f64> {
    if common_factor_residual(order, h0, g0)? <= STRUCTURE_TOL {
        let mut samples = Vec::with_capacity(SLOPE_SAMPLES);
        for w in slope_grid() {
            samples.push((w, h0.eval_unit(w).norm() * thiran_flatness_defect(order, w)?));
        }
        return loglog_slope(&samples, 0.0);
    }
    let noise = 4.0 * f64::EPSILON * (abs_sum(h0) + abs_sum(g0));
    let samples: Vec<(f64, f64)> = slope_grid()
        .into_iter()
        .map(|w| {
            let d = g0.eval_unit(w) - h0.eval_unit(w) * Complex64::from_polar(1.0, -w / 2.0);
            (w, d.norm())
        })
        .collect();
    loglog_slope(&samples, noise)
}

/// Slope of `log |H0(-e^{i eps})|` against `log eps`; `M` for a bank with `M`
/// vanishing moments. `|H0(-e^{i eps})|^2` is even in `eps`, so the fit
/// carries an `eps^2` term to absorb the curvature of long filters.
pub fn vanishing_moment_slope(h0: &LaurentFilter) -> Result<f64> {
    let noise = 4.0 * f64::EPSILON * abs_sum(h0);
    let samples: Vec<(f64, f64)> = slope_grid()
        .into_iter()
        .map(|e| (e, h0.eval_unit(PI + e).norm()))
        .collect();
    loglog_slope_even(&samples, noise)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lift_examples() {
        assert_eq!(lift_to_circle(&RealPoly::constant(1.0)).coeffs(), &[1.0]);
        let r = lift_to_circle(&RealPoly::identity());
        assert_eq!((r.lo(), r.coeffs()), (-1, &[0.25, 0.5, 0.25][..]));
        assert_eq!(lift_to_circle(&RealPoly::constant(0.9)).coeffs(), &[0.9]);
        let p = RealPoly::new(vec![0.3, -1.2, 0.7]);
        let a = lift_to_circle(&p);
        let b = lift_reflected_to_circle(&p.reflect());
        assert!((a.lo(), a.hi()) == (b.lo(), b.hi()));
        for n in a.lo()..=a.hi() {
            assert!((a.coeff(n) - b.coeff(n)).abs() < 1e-15);
        }
    }

    #[test]
    fn riesz_constant_and_linear() {
        let q = riesz_factor(&RealPoly::constant(0.9), PhaseChoice::AllInsideUnitCircle).unwrap();
        assert!((q.coeffs()[0] - 0.9f64.sqrt()).abs() < 1e-15);
        let q = riesz_factor(&RealPoly::identity(), PhaseChoice::AllInsideUnitCircle).unwrap();
        assert_eq!(q.lo(), 0);
        assert!((q.coeffs()[0] - 0.5).abs() < 1e-8 && (q.coeffs()[1] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn reciprocal_pair_solves_quadratic() {
        for t in [Complex64::new(1.7, 0.0), Complex64::new(-0.4, 0.9), Complex64::new(3.0, -2.0)] {
            let (a, b) = reciprocal_pair(t);
            assert!(a.norm() <= 1.0 && (a * b - 1.0).norm() < 1e-14);
            let y = Complex64::new(1.0, 0.0) - t;
            for z in [a, b] {
                assert!((z * z - (4.0 * y - 2.0) * z + 1.0).norm() < 1e-12 * (1.0 + z.norm_sqr()));
            }
        }
    }

    #[test]
    fn negative_r_is_rejected() {
        let err = riesz_factor(&RealPoly::new(vec![1.0, -3.0]), PhaseChoice::AllInsideUnitCircle);
        match err {
            Err(Error::NotNonnegative { y, value }) => assert!(y > 0.3 && value < 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn haar_is_half_band() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(half_band_defect(&LaurentFilter::causal(vec![s, s])) <= 1e-15);
    }

    #[test]
    fn small_design() {
        let d = design(1, 1, PhaseChoice::AllInsideUnitCircle, Method::RecursiveInterp).unwrap();
        assert!(verify_pr(&d.bank) < 1e-13);
        assert!((d.bank.h0.sum() - SQRT_2).abs() < 1e-14);
        assert!((d.bank.g0.sum() - SQRT_2).abs() < 1e-14);
        assert_eq!(d.bank.h0.len(), 1 + 1 + 1 + 1);
    }

    #[test]
    fn slope_fit_rejects_floor() {
        let samples: Vec<(f64, f64)> = slope_grid().into_iter().map(|x| (x, 1e-30)).collect();
        assert!(matches!(loglog_slope(&samples, 1e-16), Err(Error::DegenerateFit { .. })));
        let samples: Vec<(f64, f64)> = slope_grid().into_iter().map(|x| (x, 3.0 * x.powi(3))).collect();
        assert!((loglog_slope(&samples, 1e-16).unwrap() - 3.0).abs() < 1e-10);
    }
}
