//! Simultaneous root finding by Aberth–Ehrlich iteration.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::RealPoly;
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;
pub const DEFAULT_TOL: f64 = 1e-12;
/// Imaginary parts below `SNAP * (1 + |root|)` are snapped to the real axis.
const SNAP: f64 = 1e-10;

/// Roots of a real polynomial; a root of multiplicity `m` appears `m` times.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexRootSet {
    roots: Vec<Complex64>,
}

impl ComplexRootSet {
    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Roots lying on the real axis (after snapping), ascending.
    pub fn real_roots(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .roots
            .iter()
            .filter(|r| r.im == 0.0)
            .map(|r| r.re)
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }

    /// `leading * prod (y - root)` expanded back into real coefficients.
    pub fn expand(&self, leading: f64) -> RealPoly {
        let mut acc = vec![Complex64::new(leading, 0.0)];
        for &r in &self.roots {
            let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
            for (k, c) in acc.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * r;
            }
            acc = next;
        }
        RealPoly::new(acc.into_iter().map(|c| c.re).collect())
    }
}

/// All complex roots of `p` (degree >= 1).
///
/// Every returned root satisfies `|p(root)| <= tol * max|coeff| * max(1,|root|)^deg`
/// and non-real roots come in exact conjugate pairs.
pub fn poly_roots(p: &RealPoly, tol: f64) -> Result<ComplexRootSet> {
    let degree = match p.degree() {
        Some(d) if d >= 1 => d,
        other => return Err(Error::DegreeTooLow(other)),
    };
    let coeffs = p.coeffs();
    let zeros = coeffs.iter().take_while(|&&c| c == 0.0).count();
    let reduced = &coeffs[zeros..];

    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    match reduced.len() - 1 {
        0 => {}
        1 => roots.push(Complex64::new(-reduced[0] / reduced[1], 0.0)),
        _ => roots.extend(aberth(reduced, tol)?),
    }
    let roots = conjugate_symmetrize(roots)?;

    let scale = p.max_abs_coeff();
    for r in &roots {
        let bound = tol * scale * r.norm().max(1.0).powi(degree as i32);
        let residual = p.eval_complex(*r).norm();
        if residual > bound {
            return Err(Error::NonConvergence {
                iterations: MAX_ITERATIONS,
                residual: residual / (scale * r.norm().max(1.0).powi(degree as i32)),
            });
        }
    }
    Ok(ComplexRootSet { roots })
}

/// Aberth iteration on a polynomial with nonzero constant term.
fn aberth(coeffs: &[f64], tol: f64) -> Result<Vec<Complex64>> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    let deriv: Vec<f64> = monic
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect();
    let abs_coeffs: Vec<f64> = monic.iter().map(|c| c.abs()).collect();

    // Cauchy upper bound, with the geometric mean of the roots as a tighter
    // radius when it is smaller.
    let cauchy = 1.0 + monic[..n].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let radius = monic[0].abs().powf(1.0 / n as f64).min(cauchy);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64 + 0.4))
        .collect();

    let horner = |c: &[f64], x: Complex64| {
        c.iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * x + a)
    };

    let mut worst = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let mut done = true;
        worst = 0.0;
        for k in 0..n {
            let pk = horner(&monic, z[k]);
            // roundoff-level backward error counts as converged
            let floor = 4.0 * f64::EPSILON * horner(&abs_coeffs, Complex64::new(z[k].norm(), 0.0)).re;
            if pk.norm() <= floor {
                continue;
            }
            let w = pk / horner(&deriv, z[k]);
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = w / (Complex64::new(1.0, 0.0) - w * repulsion);
            if !step.is_finite() {
                continue;
            }
            z[k] -= step;
            let rel = step.norm() / (1.0 + z[k].norm());
            worst = worst.max(rel);
            if rel > tol {
                done = false;
            }
        }
        if done {
            return Ok(z);
        }
    }
    // Multiple roots converge linearly and may stall above `tol`; accept them
    // when the backward error is at roundoff level, otherwise fail.
    let stalled = z.iter().all(|&x| {
        let floor = 64.0 * f64::EPSILON * horner(&abs_coeffs, Complex64::new(x.norm(), 0.0)).re;
        horner(&monic, x).norm() <= floor.max(tol)
    });
    if stalled {
        Ok(z)
    } else {
        Err(Error::NonConvergence {
            iterations: MAX_ITERATIONS,
            residual: worst,
        })
    }
}

/// Snap near-real roots onto the axis and average the rest into exact
/// conjugate pairs.
fn conjugate_symmetrize(roots: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let mut real = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for r in roots {
        if r.im.abs() <= SNAP * (1.0 + r.norm()) {
            real.push(Complex64::new(r.re, 0.0));
        } else if r.im > 0.0 {
            upper.push(r);
        } else {
            lower.push(r);
        }
    }
    if upper.len() != lower.len() {
        return Err(Error::ConjugatePairingFailure(format!(
            "{} roots above the axis but {} below",
            upper.len(),
            lower.len()
        )));
    }
    let mut out = real;
    for u in upper {
        let (idx, _) = lower
            .iter()
            .enumerate()
            .map(|(i, l)| (i, (l.conj() - u).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("lower half has a partner for every upper root");
        let l = lower.swap_remove(idx);
        let avg = (u + l.conj()) * 0.5;
        out.push(avg);
        out.push(avg.conj());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_re(set: &ComplexRootSet) -> Vec<f64> {
        let mut v: Vec<f64> = set.roots().iter().map(|r| r.re).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn linear_root() {
        let set = poly_roots(&RealPoly::new(vec![1.0, 3.0]), DEFAULT_TOL).unwrap();
        assert_eq!(set.len(), 1);
        assert!((set.roots()[0].re + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn quadratic_tangent_roots() {
        let set = poly_roots(&RealPoly::new(vec![1.0, 10.0, 5.0]), DEFAULT_TOL).unwrap();
        let r = sorted_re(&set);
        let t1 = (PI / 10.0).tan().powi(2);
        let t2 = (3.0 * PI / 10.0).tan().powi(2);
        assert!((r[0] + t2).abs() < 1e-12);
        assert!((r[1] + t1).abs() < 1e-12);
        assert!((r[0] * r[1] - 0.2).abs() < 1e-12);
        assert!((r[0] + r[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn imaginary_pair() {
        let set = poly_roots(&RealPoly::new(vec![1.0, 0.0, 1.0]), DEFAULT_TOL).unwrap();
        let mut ims: Vec<f64> = set.roots().iter().map(|r| r.im).collect();
        ims.sort_by(f64::total_cmp);
        assert!((ims[0] + 1.0).abs() < 1e-14 && (ims[1] - 1.0).abs() < 1e-14);
        assert!(set.roots().iter().all(|r| r.re.abs() < 1e-14));
    }

    #[test]
    fn zero_roots_are_stripped() {
        let set = poly_roots(&RealPoly::new(vec![0.0, 0.0, 2.0, 1.0]), DEFAULT_TOL).unwrap();
        let r = sorted_re(&set);
        assert_eq!(r, vec![-2.0, 0.0, 0.0]);
    }

    #[test]
    fn constant_is_rejected() {
        assert!(matches!(
            poly_roots(&RealPoly::constant(3.0), DEFAULT_TOL),
            Err(Error::DegreeTooLow(Some(0)))
        ));
        assert!(matches!(
            poly_roots(&RealPoly::zero(), DEFAULT_TOL),
            Err(Error::DegreeTooLow(None))
        ));
    }

    #[test]
    fn double_root() {
        // (y+1)^2 (y-2)
        let p = RealPoly::new(vec![-2.0, -3.0, 0.0, 1.0]);
        let set = poly_roots(&p, DEFAULT_TOL).unwrap();
        // a double root is only determined to about sqrt(eps)
        assert!(set.expand(1.0).max_coeff_diff(&p) < 1e-7);
        assert!(set.roots().iter().all(|r| (r - Complex64::new(-1.0, 0.0)).norm() < 1e-7
            || (r.re - 2.0).abs() < 1e-12));
    }
}
