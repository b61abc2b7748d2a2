//! Polynomial arithmetic: real and exact-rational polynomials in one
//! variable, two-sided FIR (Laurent) filters, and root finding.

mod laurent;
mod rational;
mod real;
mod roots;

pub use laurent::LaurentFilter;
pub use rational::{ext_euclid, rat, RatPoly};
pub use real::RealPoly;
pub use roots::{poly_roots, ComplexRootSet, DEFAULT_TOL, MAX_ITERATIONS};
