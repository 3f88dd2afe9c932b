//! Band-4 spherical-harmonic frame algebra.
//!
//! An octahedral frame is a 9-vector of coefficients in the real spherical
//! harmonics `Y_{4,-4} .. Y_{4,4}`. Rotations act through the angular-momentum
//! generators `L_x, L_y, L_z`; the canonical axis-aligned frame is
//! `f0 = sqrt(7/12) Y_{4,0} + sqrt(5/12) Y_{4,4}`.
//!
//! The production rotation path factors `e^{v.L}` through ZYZ Euler angles:
//! rotations about z have a sparse closed form, and the middle rotation about
//! y is the band-4 Wigner-d matrix, evaluated exactly from the spectrum of
//! `L_y` (eigenvalues `0, ±i, ±2i, ±3i, ±4i`). A generic matrix-exponential
//! oracle lives in [`crate::oracle`] for cross-checking conventions.

use nalgebra::{Matrix3, Matrix4, SMatrix, SVector, Vector3, Vector4};
use std::sync::LazyLock;

/// Coefficient vector in the band-4 real SH basis.
pub type Coeffs = SVector<f64, 9>;
/// Dense rotation acting on band-4 coefficients.
pub type ShRotation = SMatrix<f64, 9, 9>;

/// Squared norm of the normal-aligned part of a frame, `||u0||^2 = 7/12`.
pub const U0_NORM_SQ: f64 = 7.0 / 12.0;

/// An octahedral frame (possibly anisotropic or off-variety) as band-4 SH
/// coefficients. Frames on the octahedral variety have unit norm; general
/// solver iterates do not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShFrame {
    pub coeffs: Coeffs,
}

impl ShFrame {
    pub fn new(coeffs: Coeffs) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Coeffs::zeros() }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    pub fn dot(&self, other: &ShFrame) -> f64 {
        self.coeffs.dot(&other.coeffs)
    }

    pub fn rotated(&self, rot: &ShRotation) -> ShFrame {
        ShFrame::new(rot * self.coeffs)
    }
}

impl From<Coeffs> for ShFrame {
    fn from(coeffs: Coeffs) -> Self {
        Self { coeffs }
    }
}

/// A single SH lobe. Two normalizations are in play: the reference lobe with
/// norm `sqrt(7/12)` (the z-lobe of `f0`), and the summand lobe with squared
/// norm `4/21`, three rotated copies of which sum exactly to `f0`. The
/// closed-form overlap formulas [`lobe_dot`]/[`lobe_dist_sq`] are stated for
/// the summand normalization; the reference versions carry the factor 49/16.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lobe {
    pub coeffs: Coeffs,
}

impl Lobe {
    /// The z-aligned lobe of the canonical frame: `sqrt(7/12) Y_{4,0}`.
    pub fn reference() -> Self {
        let mut c = Coeffs::zeros();
        c[4] = (7.0f64 / 12.0).sqrt();
        Self { coeffs: c }
    }

    /// The lobe with `||l||^2 = 4/21` satisfying
    /// `f0 = l + e^{(pi/2)Lx} l + e^{(pi/2)Ly} l`.
    pub fn summand() -> Self {
        let mut c = Coeffs::zeros();
        c[4] = (4.0f64 / 21.0).sqrt();
        Self { coeffs: c }
    }
}

/// Sign of the cyclic commutators: `[Lx, Ly] = COMMUTATOR_SIGN * Lz` and
/// cyclically. Fixed once numerically from the generator tables; positive
/// means the convention matches the 3x3 generators `[x], [y], [z]`.
pub const COMMUTATOR_SIGN: f64 = 1.0;

/// The three 9x9 angular-momentum generators. Entries are exact radicals;
/// the commutators close with the so(3) convention `[Lx, Ly] = +Lz` (cyclic),
/// matching the 3x3 generators, which is what makes `v -> e^{v.L}` a
/// homomorphic image of `v -> e^{[v]}`.
#[derive(Debug, Clone)]
pub struct AngularMomentum {
    pub lx: ShRotation,
    pub ly: ShRotation,
    pub lz: ShRotation,
}

impl AngularMomentum {
    pub fn canonical() -> &'static AngularMomentum {
        &ANGULAR_MOMENTUM
    }
}

fn build_lx() -> ShRotation {
    let s2 = 2.0f64.sqrt();
    let s7h = (7.0f64 / 2.0).sqrt();
    let s10 = 10.0f64.sqrt();
    let t = 3.0 / 2.0f64.sqrt();
    let mut m = ShRotation::zeros();
    // upper triangle (1-indexed rows from the reference table, 0-indexed here)
    m[(0, 7)] = -s2;
    m[(1, 6)] = -s7h;
    m[(1, 8)] = -s2;
    m[(2, 5)] = -t;
    m[(2, 7)] = -s7h;
    m[(3, 4)] = -s10;
    m[(3, 6)] = -t;
    antisymmetrize(m)
}

fn build_ly() -> ShRotation {
    let s2 = 2.0f64.sqrt();
    let s7h = (7.0f64 / 2.0).sqrt();
    let s10 = 10.0f64.sqrt();
    let t = 3.0 / 2.0f64.sqrt();
    let mut m = ShRotation::zeros();
    m[(0, 1)] = s2;
    m[(1, 2)] = s7h;
    m[(2, 3)] = t;
    m[(4, 5)] = -s10;
    m[(5, 6)] = -t;
    m[(6, 7)] = -s7h;
    m[(7, 8)] = -s2;
    antisymmetrize(m)
}

fn build_lz() -> ShRotation {
    let mut m = ShRotation::zeros();
    m[(0, 8)] = 4.0;
    m[(1, 7)] = 3.0;
    m[(2, 6)] = 2.0;
    m[(3, 5)] = 1.0;
    antisymmetrize(m)
}

fn antisymmetrize(mut m: ShRotation) -> ShRotation {
    for i in 0..9 {
        for j in 0..i {
            m[(i, j)] = -m[(j, i)];
        }
    }
    m
}

static ANGULAR_MOMENTUM: LazyLock<AngularMomentum> = LazyLock::new(|| AngularMomentum {
    lx: build_lx(),
    ly: build_ly(),
    lz: build_lz(),
});

/// Powers `Ly^0 .. Ly^8` for the spectral evaluation of `e^{beta Ly}`.
static LY_POWERS: LazyLock<[ShRotation; 9]> = LazyLock::new(|| {
    let ly = &ANGULAR_MOMENTUM.ly;
    let mut powers = [ShRotation::identity(); 9];
    for k in 1..9 {
        powers[k] = powers[k - 1] * ly;
    }
    powers
});

// Interpolation systems for the degree-8 polynomial P with P(ik) = e^{ik beta},
// k = -4..4. Even coefficients c2,c4,c6,c8 solve sum_m (-1)^m k^{2m} c_{2m} =
// cos(k beta) - 1; odd coefficients c1,c3,c5,c7 solve
// sum_m (-1)^m k^{2m+1} c_{2m+1} = sin(k beta), for k = 1..4.
static SPECTRAL_EVEN_INV: LazyLock<Matrix4<f64>> = LazyLock::new(|| {
    let m = Matrix4::from_fn(|r, c| {
        let k = (r + 1) as f64;
        let m = (c + 1) as i32;
        (-1.0f64).powi(m) * k.powi(2 * m)
    });
    m.try_inverse().expect("even spectral system is invertible")
});

static SPECTRAL_ODD_INV: LazyLock<Matrix4<f64>> = LazyLock::new(|| {
    let m = Matrix4::from_fn(|r, c| {
        let k = (r + 1) as f64;
        let m = c as i32;
        (-1.0f64).powi(m) * k.powi(2 * m + 1)
    });
    m.try_inverse().expect("odd spectral system is invertible")
});

/// The canonical axis-aligned octahedral frame
/// `f0 = (0,0,0,0,sqrt(7/12),0,0,0,sqrt(5/12))`.
pub fn canonical_frame() -> ShFrame {
    let mut c = Coeffs::zeros();
    c[4] = (7.0f64 / 12.0).sqrt();
    c[8] = (5.0f64 / 12.0).sqrt();
    ShFrame::new(c)
}

/// Sparse closed form of `e^{theta Lz}`: coefficient pairs `(m, -m)` rotate
/// with angular frequency `m`.
pub fn rot_z(theta: f64) -> ShRotation {
    let mut m = ShRotation::zeros();
    m[(4, 4)] = 1.0;
    for (i, freq) in [(0usize, 4.0f64), (1, 3.0), (2, 2.0), (3, 1.0)] {
        let j = 8 - i;
        let (s, c) = (freq * theta).sin_cos();
        m[(i, i)] = c;
        m[(i, j)] = s;
        m[(j, i)] = -s;
        m[(j, j)] = c;
    }
    m
}

/// Band-4 Wigner-d matrix `e^{beta Ly}`, evaluated exactly through the
/// spectrum of `Ly`: `e^{beta Ly} = sum_j c_j(beta) Ly^j` with the `c_j`
/// interpolating `e^{ik beta}` on the eigenvalues `ik`, `k = -4..4`.
pub fn wigner_d_beta(beta: f64) -> ShRotation {
    let cos_rhs = Vector4::from_fn(|k, _| ((k + 1) as f64 * beta).cos() - 1.0);
    let sin_rhs = Vector4::from_fn(|k, _| ((k + 1) as f64 * beta).sin());
    let c_even = *SPECTRAL_EVEN_INV * cos_rhs;
    let c_odd = *SPECTRAL_ODD_INV * sin_rhs;
    let powers = &*LY_POWERS;
    let mut out = powers[0];
    for m in 0..4 {
        out += powers[2 * m + 1] * c_odd[m];
        out += powers[2 * m + 2] * c_even[m];
    }
    out
}

/// ZYZ Euler angles of a 3x3 rotation: `R = Rz(alpha) Ry(beta) Rz(gamma)`.
pub fn zyz_angles(r: &Matrix3<f64>) -> (f64, f64, f64) {
    let c = r[(2, 2)].clamp(-1.0, 1.0);
    let beta = c.acos();
    let s = (1.0 - c * c).sqrt();
    if s > 1e-12 {
        let alpha = r[(1, 2)].atan2(r[(0, 2)]);
        let gamma = r[(2, 1)].atan2(-r[(2, 0)]);
        (alpha, beta, gamma)
    } else if c > 0.0 {
        // beta ~ 0: R = Rz(alpha + gamma)
        (r[(1, 0)].atan2(r[(0, 0)]), 0.0, 0.0)
    } else {
        // beta ~ pi: R = Rz(alpha - gamma) Ry(pi)
        ((-r[(1, 0)]).atan2(-r[(0, 0)]), std::f64::consts::PI, 0.0)
    }
}

/// Band-4 image `e^{v.L}` of the axis-angle rotation `v`, via ZYZ
/// factorization. Orthogonal, and homomorphic with SO(3): composing 3x3
/// rotations composes their images.
pub fn exp_rotation(v: &Vector3<f64>) -> ShRotation {
    if v.norm() < 1e-300 {
        return ShRotation::identity();
    }
    let r3 = nalgebra::Rotation3::from_scaled_axis(*v);
    exp_rotation_of(r3.matrix())
}

/// Band-4 image of an explicit 3x3 rotation matrix.
pub fn exp_rotation_of(r3: &Matrix3<f64>) -> ShRotation {
    let (alpha, beta, gamma) = zyz_angles(r3);
    rot_z(alpha) * wigner_d_beta(beta) * rot_z(gamma)
}

/// The canonical frame twisted by `theta` about z: `e^{theta Lz} f0`.
/// Components 1 and 9 trace a circle of radius `sqrt(5/12)` at frequency 4
/// (sin in component 1, cos in component 9); the rest of `f0` is invariant.
pub fn twist_z(theta: f64) -> ShFrame {
    let mut c = Coeffs::zeros();
    let r = (5.0f64 / 12.0).sqrt();
    c[4] = (7.0f64 / 12.0).sqrt();
    c[0] = r * (4.0 * theta).sin();
    c[8] = r * (4.0 * theta).cos();
    ShFrame::new(c)
}

/// Target of the normal-alignment constraint: rows 2..8 of a z-aligned frame,
/// `u0 = (0,0,0,sqrt(7/12),0,0,0)`.
pub fn alignment_u0() -> SVector<f64, 7> {
    let mut u = SVector::<f64, 7>::zeros();
    u[3] = (7.0f64 / 12.0).sqrt();
    u
}

/// Axis-angle rotation taking z to the unit vector `n`: parallel to
/// `z x n` with magnitude equal to the angle between them. The antipodal case
/// `n = -z` uses the fixed convention `v = (pi, 0, 0)`.
pub fn axis_angle_z_to(n: &Vector3<f64>) -> Vector3<f64> {
    let z = Vector3::z();
    let c = n.z.clamp(-1.0, 1.0);
    let axis = z.cross(n);
    let s = axis.norm();
    if s < 1e-14 {
        if c > 0.0 {
            Vector3::zeros()
        } else {
            Vector3::new(std::f64::consts::PI, 0.0, 0.0)
        }
    } else {
        axis * (s.atan2(c) / s)
    }
}

/// Per-face normal-alignment operator. `w` is rows 2..8 of `e^{-v_n.L}`;
/// a frame is aligned to `n` exactly when `w f = u0`. The full rotation
/// to z-aligned coordinates is kept for cross extraction and solver hints.
#[derive(Debug, Clone)]
pub struct AlignmentOperator {
    /// Rows 2..8 of `rotation_to_z`.
    pub w: SMatrix<f64, 7, 9>,
    /// `u0 = (0,0,0,sqrt(7/12),0,0,0)`.
    pub u0: SVector<f64, 7>,
    /// `e^{-v_n.L}`, taking frames aligned to `n` to z-aligned frames.
    pub rotation_to_z: ShRotation,
    /// Axis-angle `v_n` with `e^{[v_n]} z = n`.
    pub axis_angle: Vector3<f64>,
}

impl AlignmentOperator {
    /// Residual of the alignment constraint, `w f - u0`.
    pub fn residual(&self, f: &ShFrame) -> SVector<f64, 7> {
        self.w * f.coeffs - self.u0
    }
}

/// Builds the alignment operator for a unit normal `n`.
pub fn alignment_operator(n: &Vector3<f64>) -> AlignmentOperator {
    let v = axis_angle_z_to(n);
    let rotation_to_z = exp_rotation(&(-v));
    let w = rotation_to_z.fixed_rows::<7>(1).into_owned();
    AlignmentOperator {
        w,
        u0: alignment_u0(),
        rotation_to_z,
        axis_angle: v,
    }
}

/// Overlap `l(0)^T l(theta)` of two summand-normalized lobes whose axes make
/// angle `theta`: `(9 + 20 cos 2t + 35 cos 4t)/336`.
pub fn lobe_dot(theta: f64) -> f64 {
    (9.0 + 20.0 * (2.0 * theta).cos() + 35.0 * (4.0 * theta).cos()) / 336.0
}

/// Squared distance `||l(0) - l(theta)||^2` of two summand-normalized lobes:
/// `(5/42)(9 + 7 cos 2t) sin^2 t`.
pub fn lobe_dist_sq(theta: f64) -> f64 {
    let st = theta.sin();
    5.0 / 42.0 * (9.0 + 7.0 * (2.0 * theta).cos()) * st * st
}

/// [`lobe_dot`] rescaled by 49/16 for the reference `sqrt(7/12)` lobe.
pub fn reference_lobe_dot(theta: f64) -> f64 {
    49.0 / 16.0 * lobe_dot(theta)
}

/// [`lobe_dist_sq`] rescaled by 49/16 for the reference `sqrt(7/12)` lobe.
pub fn reference_lobe_dist_sq(theta: f64) -> f64 {
    49.0 / 16.0 * lobe_dist_sq(theta)
}

/// Squared difference between the canonical frame and a frame across a
/// crease: `||f0 - e^{b(cos a, sin a, 0).L} e^{t Lz} f0||^2`. `b` is the bend
/// angle, `a` the crease direction relative to x, `t` the twist.
pub fn crease_energy(a: f64, b: f64, t: f64) -> f64 {
    let f0 = canonical_frame();
    let axis = Vector3::new(a.cos() * b, a.sin() * b, 0.0);
    let g = exp_rotation(&axis) * (rot_z(t) * f0.coeffs);
    (f0.coeffs - g).norm_squared()
}

/// Closed form of the twist penalty across a crease of bend `b`:
/// `E(0,b,t) - E(0,b,0) = (5/24)(7 + cos 4b) sin^2 2t`.
pub fn crease_twist_cost(b: f64, t: f64) -> f64 {
    let s = (2.0 * t).sin();
    5.0 / 24.0 * (7.0 + (4.0 * b).cos()) * s * s
}
