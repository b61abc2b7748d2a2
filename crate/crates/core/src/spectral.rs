//! Frequency-domain analysis of a designed pair: the phase functions
//! `alpha_L`, `beta_L`, `eta_L`, the analyticity error `U_L` and its bound,
//! cascade evaluation of the scaling and wavelet spectra, leakage measures
//! and the Sobolev exponent.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::factorize::{hilbert_order_check, FilterBank};
use crate::poly::LaurentFilter;

pub const DEFAULT_OMEGA_MAX: f64 = 16.0 * PI;
pub const DEFAULT_GRID_N: usize = (1 << 15) + 1;
pub const DEFAULT_CASCADE_DEPTH: u32 = 25;
pub const DEFAULT_BETA_TERMS: u32 = 40;
/// Half-width of the neighbourhoods of `4 pi Z` left out of bound checks.
pub const BOUND_EXCLUSION: f64 = 0.1;
pub const BOUND_SLACK: f64 = 1e-9;

/// `alpha_L(w) = 2 (-1)^L arctan(tan^{2L+1}(w/4))`, with `arctan(+-inf) = +-pi/2`.
pub fn alpha(order: usize, omega: f64) -> f64 {
    let t = (omega / 4.0).tan().powi(2 * order as i32 + 1);
    let sign = if order % 2 == 0 { 2.0 } else { -2.0 };
    sign * t.atan()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaValue {
    pub value: f64,
    /// Bound on the omitted terms; infinite when `2^-terms |w| >= pi`.
    pub tail: f64,
}

/// `beta_L(w) = sum_{j >= 1} alpha_L(2^-j w)`, truncated after `terms` terms.
pub fn beta(order: usize, omega: f64, terms: u32) -> BetaValue {
    let value = (1..=terms)
        .map(|j| alpha(order, omega * 0.5f64.powi(j as i32)))
        .sum();
    let scaled = omega * 0.5f64.powi(terms as i32);
    let tail = if scaled.abs() < PI {
        4.0 * (scaled / 8.0).tan().abs().powi(2 * order as i32 + 1)
    } else {
        f64::INFINITY
    };
    BetaValue { value, tail }
}

/// `eta_L(w) = -alpha_L(w/2 + pi) + beta_L(w/2)`.
pub fn eta(order: usize, omega: f64, terms: u32) -> f64 {
    -alpha(order, omega / 2.0 + PI) + beta(order, omega / 2.0, terms).value
}

fn positive(omega: f64) -> f64 {
    if omega > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// `|1 - e^{i eta_L(w)}|`, which tends to `2 1_{w > 0}` away from `4 pi Z`.
pub fn eta_step(order: usize, omega: f64, terms: u32) -> f64 {
    (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, eta(order, omega, terms))).norm()
}

/// `U_L(w) = |1 - e^{i eta_L(w)} - 2 1_{w > 0}|`.
pub fn u_l(order: usize, omega: f64, terms: u32) -> f64 {
    let e = Complex64::from_polar(1.0, eta(order, omega, terms));
    (Complex64::new(1.0 - 2.0 * positive(omega), 0.0) - e).norm()
}

/// Distance from `w` to the nearest multiple of `4 pi`.
pub fn delta_4pi(omega: f64) -> f64 {
    let period = 4.0 * PI;
    let r = omega.rem_euclid(period);
    r.min(period - r)
}

/// `2 sqrt 2 (log2(max(4pi,|w|)/(4pi)) + 2) (1 - delta(w, 4piZ)/max(4pi,|w|))^{2L+1}`.
pub fn u_l_bound(order: usize, omega: f64) -> f64 {
    let big = omega.abs().max(4.0 * PI);
    let base = 1.0 - delta_4pi(omega) / big;
    2.0 * SQRT_2 * ((big / (4.0 * PI)).log2() + 2.0) * base.powi(2 * order as i32 + 1)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridParams {
    pub omega_max: f64,
    pub n: usize,
    pub depth: u32,
    pub beta_terms: u32,
}

impl Default for GridParams {
    fn default() -> Self {
        Self {
            omega_max: DEFAULT_OMEGA_MAX,
            n: DEFAULT_GRID_N,
            depth: DEFAULT_CASCADE_DEPTH,
            beta_terms: DEFAULT_BETA_TERMS,
        }
    }
}

impl GridParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 || self.n % 2 == 0 {
            return Err(Error::InvalidGrid(format!("grid size {} must be odd and >= 3", self.n)));
        }
        if !(self.omega_max > 0.0 && self.omega_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("omega max {} must be positive", self.omega_max)));
        }
        if self.depth < 1 || self.beta_terms < 1 {
            return Err(Error::InvalidGrid("cascade depth and beta terms must be at least 1".into()));
        }
        if self.omega_max > 2f64.powi(self.depth as i32) * PI {
            return Err(Error::TruncationTooShallow {
                depth: self.depth,
                omega_max: self.omega_max,
            });
        }
        Ok(())
    }

    /// The uniform frequency axis; the middle point is exactly zero.
    pub fn omega(&self) -> Vec<f64> {
        let half = (self.n / 2) as i64;
        (-half..=half)
            .map(|k| self.omega_max * k as f64 / half as f64)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumGrid {
    pub omega: Vec<f64>,
    pub phi_h: Vec<Complex64>,
    pub phi_g: Vec<Complex64>,
    pub psi_h: Vec<Complex64>,
    pub psi_g: Vec<Complex64>,
    pub cascade_depth: u32,
    pub beta_terms: u32,
}

/// Cascade evaluation of one branch: `(phi(w), psi(w))`.
struct Branch {
    low: LaurentFilter,
    high: LaurentFilter,
    mu1: f64,
    var: f64,
}

impl Branch {
    fn new(low: &LaurentFilter, high: &LaurentFilter) -> Self {
        let p = low.scale(FRAC_1_SQRT_2);
        let moment = |k: i32| -> f64 {
            (p.lo()..=p.hi()).map(|n| p.coeff(n) * (n as f64).powi(k)).sum()
        };
        let mu1 = moment(1);
        Self {
            low: low.clone(),
            high: high.clone(),
            mu1,
            var: moment(2) - mu1 * mu1,
        }
    }

    /// `prod_{j=1}^{J} H0(e^{i 2^-j w})/sqrt 2` times the second-order
    /// estimate of the remaining factors.
    fn phi(&self, omega: f64, depth: u32) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        let mut x = omega;
        for _ in 0..depth {
            x *= 0.5;
            acc *= self.low.eval_unit(x) * FRAC_1_SQRT_2;
        }
        // sum_{j>J} 2^-j = 2^-J, sum_{j>J} 4^-j = 4^-J / 3
        let tail = Complex64::new(-self.var * x * x / 6.0, -self.mu1 * x);
        acc * tail.exp()
    }

    fn point(&self, omega: f64, depth: u32) -> (Complex64, Complex64) {
        let half = self.phi(omega / 2.0, depth);
        let low = self.low.eval_unit(omega / 2.0) * FRAC_1_SQRT_2;
        let high = self.high.eval_unit(omega / 2.0) * FRAC_1_SQRT_2;
        (low * half, high * half)
    }
}

pub fn cascade_spectra(bank: &FilterBank, params: &GridParams) -> Result<SpectrumGrid> {
    params.validate()?;
    let omega = params.omega();
    let h = Branch::new(&bank.h0, &bank.h1);
    let g = Branch::new(&bank.g0, &bank.g1);
    let depth = params.depth;
    let values: Vec<[Complex64; 4]> = omega
        .par_iter()
        .map(|&w| {
            let (ph, sh) = h.point(w, depth);
            let (pg, sg) = g.point(w, depth);
            [ph, pg, sh, sg]
        })
        .collect();
    Ok(SpectrumGrid {
        phi_h: values.iter().map(|v| v[0]).collect(),
        phi_g: values.iter().map(|v| v[1]).collect(),
        psi_h: values.iter().map(|v| v[2]).collect(),
        psi_g: values.iter().map(|v| v[3]).collect(),
        omega,
        cascade_depth: depth,
        beta_terms: params.beta_terms,
    })
}

/// Max over the grid of `|phi_G - e^{i beta} e^{-iw/2} phi_H|` and
/// `|psi_G - i e^{i eta} psi_H|`.
pub fn verify_phase_relations(grid: &SpectrumGrid, order: usize, terms: u32) -> (f64, f64) {
    let defects: Vec<(f64, f64)> = grid
        .omega
        .par_iter()
        .enumerate()
        .map(|(k, &w)| {
            let b = beta(order, w, terms).value;
            let phi = grid.phi_g[k] - Complex64::from_polar(1.0, b - w / 2.0) * grid.phi_h[k];
            let e = eta(order, w, terms);
            let psi = grid.psi_g[k] - Complex64::i() * Complex64::from_polar(1.0, e) * grid.psi_h[k];
            (phi.norm(), psi.norm())
        })
        .collect();
    defects
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a.max(x), b.max(y)))
}

/// Deterministic pairwise sum.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// `|psi_H + i psi_G|` on the grid.
pub fn analytic_modulus(grid: &SpectrumGrid) -> Vec<f64> {
    grid.psi_h
        .iter()
        .zip(&grid.psi_g)
        .map(|(h, g)| (h + Complex64::i() * g).norm())
        .collect()
}

/// `(E1, E2)`: ratios of the peak and of the energy of `|psi_H + i psi_G|` on
/// negative against positive frequencies.
pub fn leakage_measures(grid: &SpectrumGrid) -> (f64, f64) {
    let modulus = analytic_modulus(grid);
    let mut neg = Vec::new();
    let mut pos = Vec::new();
    for (w, m) in grid.omega.iter().zip(&modulus) {
        if *w < 0.0 {
            neg.push(*m);
        } else if *w > 0.0 {
            pos.push(*m);
        }
    }
    let peak = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let energy = |v: &[f64]| pairwise_sum(&v.iter().map(|m| m * m).collect::<Vec<_>>());
    (peak(&neg) / peak(&pos), energy(&neg) / energy(&pos))
}

/// Remove `(1 + z^-1)^M` from `h0` and normalize the rest to `B(1) = 1`.
pub fn deflate_moments(h0: &LaurentFilter, moments: usize) -> Result<LaurentFilter> {
    let scale_ref = h0.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut c = h0.coeffs().to_vec();
    for _ in 0..moments {
        if c.len() < 2 {
            return Err(Error::DeflationRemainder(f64::INFINITY));
        }
        let mut q = Vec::with_capacity(c.len() - 1);
        let mut carry = 0.0;
        for &a in &c[..c.len() - 1] {
            carry = a - carry;
            q.push(carry);
        }
        let remainder = c[c.len() - 1] - carry;
        if remainder.abs() > 1e-8 * scale_ref {
            return Err(Error::DeflationRemainder(remainder));
        }
        c = q;
    }
    let b = LaurentFilter::new(h0.lo(), c);
    Ok(b.scale(1.0 / b.sum()))
}

/// Spectral radius of the transition operator `T_{jk} = 2 p(2j - k)`,
/// `j, k in -K..=K`, where `p` is the autocorrelation of `b`.
pub fn transition_radius(b: &LaurentFilter) -> Result<f64> {
    let p = b.autocorrelation();
    let k = p.hi().max(0) as i64;
    let size = (2 * k + 1) as usize;
    let t = DMatrix::from_fn(size, size, |r, c| {
        let j = r as i64 - k;
        let m = c as i64 - k;
        2.0 * p.coeff(2 * j - m)
    });
    let eig = t.complex_eigenvalues();
    let radius = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !radius.is_finite() || radius <= 0.0 {
        return Err(Error::EigenFailure(format!("spectral radius {radius}")));
    }
    Ok(radius)
}

/// Power-iteration estimate of the same spectral radius.
pub fn transition_radius_power(b: &LaurentFilter, iterations: usize) -> f64 {
    let p = b.autocorrelation();
    let k = p.hi().max(0) as i64;
    let size = (2 * k + 1) as usize;
    let t = DMatrix::from_fn(size, size, |r, c| 2.0 * p.coeff(2 * (r as i64 - k) - (c as i64 - k)));
    let mut v = nalgebra::DVector::from_element(size, 1.0);
    let mut rho = 0.0;
    for _ in 0..iterations {
        let next = &t * &v;
        let norm = next.norm();
        if norm == 0.0 {
            return 0.0;
        }
        rho = norm / v.norm();
        v = next / norm;
    }
    rho
}

/// Sobolev exponent `M - log2(rho)/2` of the wavelet built on `h0`.
pub fn sobolev_exponent_of(h0: &LaurentFilter, moments: usize) -> Result<f64> {
    let b = deflate_moments(h0, moments)?;
    Ok(moments as f64 - transition_radius(&b)?.log2() / 2.0)
}

pub fn sobolev_exponent(bank: &FilterBank) -> Result<f64> {
    if bank.moments == 0 {
        return Err(Error::InvalidOrder {
            name: "M",
            value: 0,
            reason: "the Sobolev estimate needs at least one vanishing moment",
        });
    }
    sobolev_exponent_of(&bank.h0, bank.moments)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticityReport {
    pub e1: f64,
    pub e2: f64,
    pub ul_max_on_grid: f64,
    pub bound_violations: usize,
    /// Infinite when the defect underflows.
    pub hilbert_slope: f64,
    pub sobolev_exponent: f64,
}

/// Count grid points, away from `4 pi Z`, where `U_L` exceeds its bound.
pub fn bound_check(order: usize, omega: &[f64], terms: u32) -> (f64, usize) {
    let values: Vec<(f64, bool)> = omega
        .par_iter()
        .map(|&w| {
            let u = u_l(order, w, terms);
            let checked = delta_4pi(w) > BOUND_EXCLUSION;
            (u, checked && u > u_l_bound(order, w) + BOUND_SLACK)
        })
        .collect();
    let max = values.iter().map(|v| v.0).fold(0.0, f64::max);
    (max, values.iter().filter(|v| v.1).count())
}

pub fn analyze(bank: &FilterBank, params: &GridParams) -> Result<(AnalyticityReport, SpectrumGrid)> {
    let grid = cascade_spectra(bank, params)?;
    let (e1, e2) = leakage_measures(&grid);
    let (ul_max_on_grid, bound_violations) = bound_check(bank.order, &grid.omega, params.beta_terms);
    let hilbert_slope = match hilbert_order_check(bank) {
        Ok(s) => s,
        Err(Error::DegenerateFit { .. }) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    let report = AnalyticityReport {
        e1,
        e2,
        ul_max_on_grid,
        bound_violations,
        hilbert_slope,
        sobolev_exponent: sobolev_exponent(bank)?,
    };
    Ok((report, grid))
}
