//! Projection operators used by the operator-splitting solver.
//!
//! Everything here is an exact Euclidean projection: the per-face alignment
//! set (affine for epsilon = 0, a cone-ball slab otherwise), and the epigraph
//! cone of the p-norm over per-edge block magnitudes. The p = 1, 2, inf
//! cases have closed forms (sort-based for the l1 cone, which also yields
//! the max-norm cone through Moreau polarity); general p solves the scalar
//! dual equation by bisection with per-component Newton roots.

use crate::energy::PNorm;
use crate::sh::{AlignmentOperator, Coeffs};

/// Projects `f` onto `{ ||W f - u0|| <= epsilon }` in place. Because `W` has
/// orthonormal rows this is exact: the constrained 7 components move straight
/// toward the target ball, the free 2 stay put. `epsilon = 0` is the affine
/// alignment set.
pub fn project_alignment(f: &mut Coeffs, op: &AlignmentOperator, epsilon: f64) {
    let r = op.w * *f - op.u0;
    let norm = r.norm();
    if norm <= epsilon {
        return;
    }
    let shrink = if epsilon > 0.0 { 1.0 - epsilon / norm } else { 1.0 };
    *f -= op.w.transpose() * (r * shrink);
}

/// Projects `(t, s)` onto the l1-norm epigraph cone `{ sum |s_i| <= t }`.
/// Exact via the sorted piecewise-linear dual equation.
pub fn project_l1_epigraph(t: f64, s: &mut [f64]) -> f64 {
    let total: f64 = s.iter().map(|v| v.abs()).sum();
    if total <= t {
        return t;
    }
    let max = s.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if max <= -t {
        s.fill(0.0);
        return 0.0;
    }
    let mut mags: Vec<f64> = s.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    // with the top k+1 entries active, lambda = (sum_{i<=k} a_i - t) / (k + 2)
    let mut prefix = 0.0;
    let mut lambda = (total - t) / (mags.len() + 1) as f64;
    for k in 0..mags.len() {
        prefix += mags[k];
        let cand = (prefix - t) / (k + 2) as f64;
        let upper = mags[k];
        let lower = if k + 1 < mags.len() { mags[k + 1] } else { 0.0 };
        if cand <= upper + 1e-15 && cand >= lower - 1e-15 {
            lambda = cand;
            break;
        }
    }
    let lambda = lambda.max(0.0);
    for v in s.iter_mut() {
        *v = v.signum() * (v.abs() - lambda).max(0.0);
    }
    t + lambda
}

/// Projects `(t, s)` onto the max-norm epigraph cone `{ max |s_i| <= t }`
/// through Moreau polarity with the l1 cone.
pub fn project_linf_epigraph(t: f64, s: &mut [f64]) -> f64 {
    let mut neg: Vec<f64> = s.iter().map(|v| -v).collect();
    let t_polar = project_l1_epigraph(-t, &mut neg);
    for (v, y) in s.iter_mut().zip(&neg) {
        *v += y;
    }
    t + t_polar
}

/// Projects `(t, s)` onto the second-order cone `{ ||s||_2 <= t }`.
pub fn project_l2_epigraph(t: f64, s: &mut [f64]) -> f64 {
    let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= t {
        return t;
    }
    if norm <= -t {
        s.fill(0.0);
        return 0.0;
    }
    let scale = 0.5 * (1.0 + t / norm);
    for v in s.iter_mut() {
        *v *= scale;
    }
    scale * norm
}

fn lp_norm(s: &[f64], p: f64) -> f64 {
    let max = s.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if max == 0.0 {
        return 0.0;
    }
    // scale to avoid overflow for large p
    max * s
        .iter()
        .map(|v| (v.abs() / max).powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// Root of `t z + lambda z^(p-1) = target` for z >= 0, by safeguarded Newton.
fn component_root(t: f64, lambda: f64, p: f64, target: f64) -> f64 {
    if target <= 0.0 {
        return 0.0;
    }
    let mut hi = if t > 0.0 { target / t } else { f64::INFINITY };
    let alt = (target / lambda).powf(1.0 / (p - 1.0));
    hi = hi.min(alt);
    let mut lo = 0.0f64;
    let g = |z: f64| t * z + lambda * z.powf(p - 1.0) - target;
    let mut z = hi.min(target / (t + lambda).max(1e-300));
    for _ in 0..60 {
        let gz = g(z);
        if gz > 0.0 {
            hi = z;
        } else {
            lo = z;
        }
        let dg = t + lambda * (p - 1.0) * z.powf(p - 2.0);
        let newton = z - gz / dg;
        z = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo) <= 1e-15 * hi.max(1.0) {
            break;
        }
    }
    z
}

/// Projects `(t, s)` (s componentwise nonnegative) onto the p-norm epigraph
/// cone for general finite p > 1: an Illinois secant iteration on the scalar
/// dual multiplier, with the unit-vector components recovered per coordinate.
fn project_lp_epigraph_general(t: f64, s: &mut [f64], p: f64) -> f64 {
    if lp_norm(s, p) <= t {
        return t;
    }
    let q = p / (p - 1.0);
    if lp_norm(s, q) <= -t {
        s.fill(0.0);
        return 0.0;
    }
    // active case: s' = t' z with sum z^p = 1, t' = t + lambda, and
    // t' z_i + lambda z_i^(p-1) = s_i
    let mut z = vec![0.0; s.len()];
    let mut residual = |lambda: f64, z_out: &mut [f64]| -> f64 {
        let tp = t + lambda;
        let mut sum = 0.0;
        for (i, &si) in s.iter().enumerate() {
            let zi = component_root(tp, lambda, p, si);
            z_out[i] = zi;
            sum += zi.powf(p);
        }
        sum - 1.0
    };
    // bracket: psi > 0 at lo (norm exceeds t there), psi < 0 once the dual
    // ball swallows s
    let mut lo = (-t).max(0.0);
    let mut hi = lo.max(1.0) + lp_norm(s, q);
    let mut f_lo = residual(lo, &mut z);
    let mut f_hi = residual(hi, &mut z);
    for _ in 0..60 {
        if f_hi < 0.0 {
            break;
        }
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = residual(hi, &mut z);
    }
    let mut lambda = hi;
    for _ in 0..80 {
        // secant step, bisection fallback when it leaves the bracket
        let denom = f_hi - f_lo;
        let mut next = if denom.abs() > 1e-300 {
            hi - f_hi * (hi - lo) / denom
        } else {
            0.5 * (lo + hi)
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let f_next = residual(next, &mut z);
        if f_next > 0.0 {
            lo = next;
            f_lo = f_next;
            f_hi *= 0.5; // Illinois weighting keeps the secant moving
        } else {
            hi = next;
            f_hi = f_next;
            f_lo *= 0.5;
        }
        lambda = next;
        if f_next.abs() <= 1e-13 || hi - lo <= 1e-14 * hi.max(1.0) {
            break;
        }
    }
    residual(lambda, &mut z);
    let tp = t + lambda;
    for (v, zi) in s.iter_mut().zip(&z) {
        *v = tp * zi;
    }
    tp
}

/// Projects `(t, s)` onto the epigraph cone of the chosen p-norm. The `s`
/// entries are block magnitudes and must be nonnegative except through the
/// closed-form l1/l2/linf paths, which accept signs.
pub fn project_pnorm_epigraph(t: f64, s: &mut [f64], p: PNorm) -> f64 {
    match p {
        PNorm::Finite(p) if p == 1.0 => project_l1_epigraph(t, s),
        PNorm::Finite(p) if p == 2.0 => project_l2_epigraph(t, s),
        PNorm::Finite(p) => project_lp_epigraph_general(t, s, p),
        PNorm::Infinity => project_linf_epigraph(t, s),
    }
}
