//! Closed-form identity suite over the frame algebra.
//!
//! Each identity certifies one algebraic fact numerically on a grid or a
//! seeded random sample, reporting the worst residual against a fixed
//! tolerance. The suite backs the `verify` subcommand and the acceptance
//! tests; it takes the angular-momentum operators as an argument so a
//! perturbed copy can be injected to confirm the suite actually detects
//! corruption.

use crate::oracle;
use crate::sh::{
    self, alignment_operator, canonical_frame, crease_twist_cost, exp_rotation, lobe_dist_sq,
    lobe_dot, twist_z, AngularMomentum, Lobe, ShRotation,
};
use nalgebra::Vector3;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Outcome of one identity check.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityReport {
    fn new(name: &str, max_residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
        }
    }
}

/// Number of grid samples per axis used by default (50), scaled by `grid`.
#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub grid: usize,
    pub random_samples: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            grid: 50,
            random_samples: 1000,
            seed: 0,
        }
    }
}

fn random_axis_angle(rng: &mut impl Rng, max_angle: f64) -> Vector3<f64> {
    let mut v = Vector3::new(
        rng.random::<f64>() - 0.5,
        rng.random::<f64>() - 0.5,
        rng.random::<f64>() - 0.5,
    );
    if v.norm() < 1e-9 {
        v = Vector3::x();
    }
    v.normalize() * (rng.random::<f64>() * max_angle)
}

fn series_exp(ops: &AngularMomentum, v: &Vector3<f64>) -> ShRotation {
    oracle::expm(&(ops.lx * v.x + ops.ly * v.y + ops.lz * v.z))
}

/// Runs the full identity suite. All identities that involve rotations use
/// the series oracle built from `ops`, so injecting perturbed operators makes
/// the corresponding identities fail by name.
pub fn run_identity_suite(ops: &AngularMomentum, config: &SuiteConfig) -> Vec<IdentityReport> {
    let mut out = Vec::new();
    let f0 = canonical_frame();
    let pi = std::f64::consts::PI;

    // antisymmetry of the generators
    let anti = [&ops.lx, &ops.ly, &ops.lz]
        .iter()
        .map(|l| (*l + l.transpose()).norm())
        .fold(0.0f64, f64::max);
    out.push(IdentityReport::new("generator_antisymmetry", anti, 1e-14));

    // so(3) commutator closure with positive cyclic sign
    let comm = |a: &ShRotation, b: &ShRotation| a * b - b * a;
    let res = (comm(&ops.lx, &ops.ly) - ops.lz)
        .norm()
        .max((comm(&ops.ly, &ops.lz) - ops.lx).norm())
        .max((comm(&ops.lz, &ops.lx) - ops.ly).norm());
    out.push(IdentityReport::new("commutator_closure", res, 1e-12));

    // g^T Li^T Lj g = (20/3) delta_ij over random variety frames
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let ls = [&ops.lx, &ops.ly, &ops.lz];
    let mut worst = 0.0f64;
    for _ in 0..config.random_samples {
        let v = random_axis_angle(&mut rng, pi);
        let g = series_exp(ops, &v) * f0.coeffs;
        for (i, li) in ls.iter().enumerate() {
            for (j, lj) in ls.iter().enumerate() {
                let val = (li.transpose() * *lj * g).dot(&g);
                let expected = if i == j { 20.0 / 3.0 } else { 0.0 };
                worst = worst.max((val - expected).abs());
            }
        }
    }
    out.push(IdentityReport::new("twenty_thirds_isotropy", worst, 1e-9));

    // production ZYZ exponential vs series oracle
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let v = random_axis_angle(&mut rng, pi);
        worst = worst.max((exp_rotation(&v) - series_exp(ops, &v)).norm());
    }
    out.push(IdentityReport::new("exp_zyz_vs_series", worst, 1e-9));

    // orthogonality of rotations: ||e^{vL} f|| = ||f||
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let v = random_axis_angle(&mut rng, pi);
        let e = series_exp(ops, &v);
        worst = worst.max((e.transpose() * e - ShRotation::identity()).norm());
    }
    out.push(IdentityReport::new("rotation_orthogonality", worst, 1e-9));

    // four-fold twist symmetry: e^{(pi/2)Lz} f0 = f0
    let quarter = series_exp(ops, &Vector3::new(0.0, 0.0, pi / 2.0));
    out.push(IdentityReport::new(
        "twist_quarter_period",
        (quarter * f0.coeffs - f0.coeffs).norm(),
        1e-12,
    ));

    // twist derivative magnitude ||Lz f0||^2 = 20/3
    out.push(IdentityReport::new(
        "twist_rate",
        ((ops.lz * f0.coeffs).norm_squared() - 20.0 / 3.0).abs(),
        1e-12,
    ));

    // lobe overlap formulas vs the Legendre oracle, both normalizations
    let l_ref = Lobe::reference().coeffs;
    let mut worst = 0.0f64;
    for i in 0..=100 {
        let theta = pi * i as f64 / 100.0;
        let p4 = oracle::legendre_p4(theta.cos());
        let lr = series_exp(ops, &Vector3::new(0.0, theta, 0.0)) * l_ref;
        worst = worst
            .max((l_ref.dot(&lr) - 49.0 / 16.0 * lobe_dot(theta)).abs())
            .max((l_ref.dot(&lr) - 7.0 / 12.0 * p4).abs())
            .max(((l_ref - lr).norm_squared() - 49.0 / 16.0 * lobe_dist_sq(theta)).abs())
            .max(((l_ref - lr).norm_squared() - 2.0 * 7.0 / 12.0 * (1.0 - p4)).abs());
    }
    out.push(IdentityReport::new("lobe_overlap_wigner", worst, 1e-9));

    // f0 decomposes into three summand lobes
    let l = Lobe::summand().coeffs;
    let sum = l
        + series_exp(ops, &Vector3::new(pi / 2.0, 0.0, 0.0)) * l
        + series_exp(ops, &Vector3::new(0.0, pi / 2.0, 0.0)) * l;
    out.push(IdentityReport::new(
        "lobe_sum_decomposition",
        (sum - f0.coeffs).norm(),
        1e-12,
    ));

    // crease twist cost closed form on a (b, t) grid
    let n = config.grid.max(2);
    let crease = |a: f64, b: f64, t: f64| {
        let axis = Vector3::new(a.cos() * b, a.sin() * b, 0.0);
        let g = series_exp(ops, &axis) * (series_exp(ops, &Vector3::new(0.0, 0.0, t)) * f0.coeffs);
        (f0.coeffs - g).norm_squared()
    };
    let mut worst = 0.0f64;
    for ib in 0..n {
        let b = pi * ib as f64 / (n - 1) as f64;
        let base = crease(0.0, b, 0.0);
        for it in 0..n {
            let t = pi * it as f64 / (n - 1) as f64;
            worst = worst.max((crease(0.0, b, t) - base - crease_twist_cost(b, t)).abs());
        }
    }
    out.push(IdentityReport::new("crease_twist_closed_form", worst, 1e-9));

    // crease alignment minimizes the jump: E(a,b,t) >= E(0,b,0)
    let n3 = (config.grid / 2).clamp(8, 40);
    let mut min = f64::INFINITY;
    for ia in 0..n3 {
        let a = pi * ia as f64 / n3 as f64;
        for ib in 0..n3 {
            let b = pi * ib as f64 / n3 as f64;
            let base = crease(0.0, b, 0.0);
            for it in 0..n3 {
                let t = pi * it as f64 / n3 as f64;
                min = min.min(crease(a, b, t) - base);
            }
        }
    }
    out.push(IdentityReport::new(
        "crease_alignment_minimality",
        (-min).max(0.0),
        1e-9,
    ));

    // alignment operator sends every n-aligned frame to u0
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let nrm = random_axis_angle(&mut rng, 1.0).normalize();
        let op = alignment_operator(&nrm);
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        let f = exp_rotation(&op.axis_angle) * twist_z(theta).coeffs;
        worst = worst.max((op.w * f - op.u0).norm());
    }
    out.push(IdentityReport::new("alignment_constraint", worst, 1e-9));

    out
}

/// Convenience wrapper over the canonical operators.
pub fn run_default_suite(config: &SuiteConfig) -> Vec<IdentityReport> {
    run_identity_suite(sh::AngularMomentum::canonical(), config)
}
