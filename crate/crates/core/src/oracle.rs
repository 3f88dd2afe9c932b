//! Reference implementations used to cross-check the production paths.
//!
//! These are deliberately independent of the closed forms they validate:
//! [`expm`] is a generic scaling-and-squaring matrix exponential, and
//! [`legendre_p4`] backs the lobe-overlap formulas through the zonal
//! Wigner-d entry `d^4_00(theta) = P4(cos theta)`.

use crate::sh::ShRotation;

/// Matrix exponential of a 9x9 matrix by scaling and squaring with a Taylor
/// series on the scaled matrix. Accurate to ~1e-13 for inputs with norm up to
/// a few tens, which covers `v.L` for any axis-angle `v` of interest.
pub fn expm(m: &ShRotation) -> ShRotation {
    let norm = m.norm();
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let scaled = m / 2.0f64.powi(squarings as i32);
    let mut term = ShRotation::identity();
    let mut sum = ShRotation::identity();
    for k in 1..=18 {
        term = term * scaled / k as f64;
        sum += term;
    }
    let mut out = sum;
    for _ in 0..squarings {
        out = out * out;
    }
    out
}

/// Legendre polynomial `P4(x) = (35 x^4 - 30 x^2 + 3)/8`.
pub fn legendre_p4(x: f64) -> f64 {
    let x2 = x * x;
    (35.0 * x2 * x2 - 30.0 * x2 + 3.0) / 8.0
}
