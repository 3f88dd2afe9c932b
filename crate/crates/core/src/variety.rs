//! Projection onto the octahedral variety and cross extraction.
//!
//! The variety is the orbit of the canonical frame under rotations, a
//! 3-dimensional subset of the unit sphere in R^9. Projection maximizes the
//! inner product with a rotated canonical frame over SO(3) by damped Newton
//! ascent from a fixed covering of starts; the octahedral stabilizer makes
//! the landscape multimodal, so single-start refinement is only used where a
//! trustworthy hint exists.

use crate::sh::{
    alignment_operator, canonical_frame, exp_rotation_of, AngularMomentum, Coeffs, ShFrame,
};
use nalgebra::{Matrix3, Rotation3, Vector3};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Result of projecting a coefficient vector onto the variety.
#[derive(Debug, Clone)]
pub struct ProjectedFrame {
    /// Nearest variety frame (unit norm).
    pub frame: ShFrame,
    /// 3x3 rotation whose band-4 image maps the canonical frame to `frame`.
    pub rotation: Matrix3<f64>,
    /// Distance from the input to `frame`.
    pub distance: f64,
    /// Set when the input direction is numerically undefined (`||q|| < 1e-8`)
    /// and the result is an arbitrary tie-break.
    pub low_confidence: bool,
}

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("tangential components collapsed (scale {scale:.3e}); consult degeneracy handling")]
    DegenerateTangential { scale: f64 },
}

/// A cross extracted from a normal-aligned frame.
#[derive(Debug, Clone)]
pub struct ExtractedCross {
    pub normal: Vector3<f64>,
    /// Twist about the normal, reduced to `[0, pi/2)`.
    pub theta: f64,
    /// Tangential magnitude; 1 for frames on the variety.
    pub scale: f64,
    /// Two orthonormal tangent directions of the cross.
    pub dirs: [Vector3<f64>; 2],
}

const SCALE_UNIT: f64 = 0.645_497_224_367_902_8; // sqrt(5/12)

/// Deterministic start rotations covering SO(3) up to the octahedral
/// quotient: identity, face/diagonal axes at two angles, edge axes at one.
fn deterministic_starts() -> Vec<Matrix3<f64>> {
    let mut starts = vec![Matrix3::identity()];
    let face = [Vector3::x(), Vector3::y(), Vector3::z()];
    let diag = [
        Vector3::new(1.0, 1.0, 1.0),
        Vector3::new(1.0, 1.0, -1.0),
        Vector3::new(1.0, -1.0, 1.0),
        Vector3::new(-1.0, 1.0, 1.0),
    ];
    let edge = [
        Vector3::new(1.0, 1.0, 0.0),
        Vector3::new(1.0, -1.0, 0.0),
        Vector3::new(1.0, 0.0, 1.0),
        Vector3::new(1.0, 0.0, -1.0),
        Vector3::new(0.0, 1.0, 1.0),
        Vector3::new(0.0, 1.0, -1.0),
    ];
    let angles = [std::f64::consts::PI / 5.0, 2.0 * std::f64::consts::PI / 5.0];
    for axis in face.iter().chain(diag.iter()) {
        for &a in &angles {
            starts.push(*Rotation3::from_scaled_axis(axis.normalize() * a).matrix());
        }
    }
    for axis in &edge {
        starts.push(
            *Rotation3::from_scaled_axis(axis.normalize() * std::f64::consts::FRAC_PI_4).matrix(),
        );
    }
    // 1 + 14 + 6 = 21; pad with three more face-axis samples to 24
    for axis in &face {
        starts.push(
            *Rotation3::from_scaled_axis(axis.normalize() * (3.0 * std::f64::consts::PI / 10.0))
                .matrix(),
        );
    }
    starts
}

/// Newton ascent of `q . rho(R) f0` over left-multiplied increments,
/// returning the refined rotation and the achieved inner product.
fn refine(q_unit: &Coeffs, start: Matrix3<f64>) -> (Matrix3<f64>, f64) {
    let am = AngularMomentum::canonical();
    let f0 = canonical_frame().coeffs;
    let mut r = Rotation3::from_matrix(&start);
    let mut g = exp_rotation_of(r.matrix()) * f0;
    let mut value = q_unit.dot(&g);
    for _ in 0..60 {
        let lg = [am.lx * g, am.ly * g, am.lz * g];
        let grad = Vector3::new(q_unit.dot(&lg[0]), q_unit.dot(&lg[1]), q_unit.dot(&lg[2]));
        if grad.norm() < 1e-11 {
            break;
        }
        // symmetrized second derivative: q^T (Li Lj + Lj Li)/2 g
        let mut hess = Matrix3::zeros();
        for i in 0..3 {
            let li = [&am.lx, &am.ly, &am.lz][i];
            for j in i..3 {
                let lj = [&am.lx, &am.ly, &am.lz][j];
                let hv = 0.5 * (q_unit.dot(&(li * lg[j])) + q_unit.dot(&(lj * lg[i])));
                hess[(i, j)] = hv;
                hess[(j, i)] = hv;
            }
        }
        // Levenberg damping: keep increasing mu until the step improves
        let mut mu = 0.0;
        let mut stepped = false;
        for _ in 0..12 {
            let m = hess - Matrix3::identity() * mu;
            let step = match m.try_inverse() {
                Some(inv) => -(inv * grad),
                None => {
                    mu = if mu == 0.0 { 1e-4 } else { mu * 10.0 };
                    continue;
                }
            };
            let step = if step.norm() > 0.7 { step * (0.7 / step.norm()) } else { step };
            let r_new = Rotation3::from_scaled_axis(step) * r;
            let g_new = exp_rotation_of(r_new.matrix()) * f0;
            let v_new = q_unit.dot(&g_new);
            if v_new > value - 1e-16 {
                r = r_new;
                g = g_new;
                value = v_new;
                stepped = true;
                break;
            }
            mu = if mu == 0.0 { 1e-4 } else { mu * 10.0 };
        }
        if !stepped {
            break;
        }
    }
    (*r.matrix(), value)
}

fn project_over_starts(q: &ShFrame, starts: &[Matrix3<f64>]) -> ProjectedFrame {
    let norm = q.norm();
    if norm < 1e-8 {
        let f = canonical_frame();
        return ProjectedFrame {
            distance: (f.coeffs - q.coeffs).norm(),
            frame: f,
            rotation: Matrix3::identity(),
            low_confidence: true,
        };
    }
    let q_unit = q.coeffs / norm;
    let mut best: Option<(Matrix3<f64>, f64)> = None;
    for &s in starts {
        let (r, v) = refine(&q_unit, s);
        if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
            best = Some((r, v));
        }
    }
    let (rotation, _) = best.expect("at least one start");
    let frame = ShFrame::new(exp_rotation_of(&rotation) * canonical_frame().coeffs);
    ProjectedFrame {
        distance: (frame.coeffs - q.coeffs).norm(),
        frame,
        rotation,
        low_confidence: false,
    }
}

/// Projects `q` onto the variety by multi-start refinement: 24 deterministic
/// starts covering the octahedral quotient plus 8 seeded random starts.
pub fn project_to_variety(q: &ShFrame) -> ProjectedFrame {
    let mut starts = deterministic_starts();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6f63_7461);
    for _ in 0..8 {
        let axis = Vector3::new(
            rng.random::<f64>() - 0.5,
            rng.random::<f64>() - 0.5,
            rng.random::<f64>() - 0.5,
        );
        let axis = if axis.norm() < 1e-9 { Vector3::x() } else { axis.normalize() };
        let angle = rng.random::<f64>() * std::f64::consts::PI;
        starts.push(*Rotation3::from_scaled_axis(axis * angle).matrix());
    }
    project_over_starts(q, &starts)
}

/// Projection seeded with a trusted rotation hint (plus the identity),
/// for inputs known to lie near the hinted basin. Much cheaper than the
/// multi-start path.
pub fn project_with_hint(q: &ShFrame, hint: &Matrix3<f64>) -> ProjectedFrame {
    let starts = [*hint, Matrix3::identity()];
    project_over_starts(q, &starts)
}

/// Distance from `q` to the octahedral variety, `||pi_V(q) - q||`.
pub fn degeneracy_distance(q: &ShFrame) -> f64 {
    project_to_variety(q).distance
}

/// Builds the frame aligned to `n` with twist `theta` and tangential scale
/// `scale` (1 recovers a variety frame).
pub fn aligned_frame(n: &Vector3<f64>, theta: f64, scale: f64) -> ShFrame {
    let op = alignment_operator(n);
    let mut c = Coeffs::zeros();
    c[4] = (7.0f64 / 12.0).sqrt();
    c[0] = scale * SCALE_UNIT * (4.0 * theta).sin();
    c[8] = scale * SCALE_UNIT * (4.0 * theta).cos();
    // rotation_to_z maps n-aligned to z-aligned; invert by transpose
    ShFrame::new(op.rotation_to_z.transpose() * c)
}

/// Extracts the cross from a frame approximately aligned to `n`: the twist
/// angle comes from the two tangential coefficients in z-aligned coordinates,
/// the scale from their magnitude.
pub fn extract_cross(f: &ShFrame, n: &Vector3<f64>) -> Result<ExtractedCross, ExtractError> {
    let op = alignment_operator(n);
    let zc = op.rotation_to_z * f.coeffs;
    let scale = zc[0].hypot(zc[8]) / SCALE_UNIT;
    if scale < 1e-6 {
        return Err(ExtractError::DegenerateTangential { scale });
    }
    let mut theta = (zc[0].atan2(zc[8]) / 4.0).rem_euclid(std::f64::consts::FRAC_PI_2);
    // boundary ties resolve toward zero
    if theta >= std::f64::consts::FRAC_PI_2 - 1e-15 {
        theta = 0.0;
    }
    let r3 = Rotation3::from_scaled_axis(op.axis_angle);
    let (s, c) = theta.sin_cos();
    let dirs = [
        r3 * Vector3::new(c, s, 0.0),
        r3 * Vector3::new(-s, c, 0.0),
    ];
    Ok(ExtractedCross {
        normal: *n,
        theta,
        scale,
        dirs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sh::{exp_rotation, Lobe};
    use approx::assert_abs_diff_eq;

    fn random_rotation(rng: &mut impl Rng) -> Vector3<f64> {
        let v = Vector3::new(
            rng.random::<f64>() - 0.5,
            rng.random::<f64>() - 0.5,
            rng.random::<f64>() - 0.5,
        );
        v.normalize() * (rng.random::<f64>() * std::f64::consts::PI)
    }

    #[test]
    fn projects_canonical_frame_to_itself() {
        let f0 = canonical_frame();
        let p = project_to_variety(&f0);
        assert!(p.distance < 1e-9);
        assert!((p.frame.coeffs - f0.coeffs).norm() < 1e-9);
        assert!(!p.low_confidence);
    }

    #[test]
    fn projection_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let v = random_rotation(&mut rng);
            let target = ShFrame::new(exp_rotation(&v) * canonical_frame().coeffs);
            let q = ShFrame::new(target.coeffs * 2.5);
            let p = project_to_variety(&q);
            assert!(
                (p.frame.coeffs - target.coeffs).norm() < 1e-6,
                "missed rotated frame by {}",
                (p.frame.coeffs - target.coeffs).norm()
            );
        }
    }

    #[test]
    fn pure_normal_part_distance_and_grid_oracle() {
        // The tangentially-collapsed frame is the reference lobe; its nearest
        // variety point is any z-aligned frame, at distance sqrt(5/12).
        let q = ShFrame::new(Lobe::reference().coeffs);
        let p = project_to_variety(&q);
        assert_abs_diff_eq!(p.distance, (5.0f64 / 12.0).sqrt(), epsilon = 1e-7);
        // brute-force certificate that no rotation does better
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut best = -1.0f64;
        for _ in 0..4000 {
            let g = exp_rotation(&random_rotation(&mut rng)) * canonical_frame().coeffs;
            best = best.max(q.coeffs.dot(&g));
        }
        assert!(best <= 7.0 / 12.0 + 1e-9);
        let achieved = q.coeffs.dot(&p.frame.coeffs);
        assert!(achieved >= best - 1e-6);
    }

    #[test]
    fn degeneracy_distance_cases() {
        let f0 = canonical_frame();
        assert!(degeneracy_distance(&f0) < 1e-6);
        let zero = ShFrame::zero();
        let p = project_to_variety(&zero);
        assert!(p.low_confidence);
        assert_abs_diff_eq!(p.distance, 1.0, epsilon = 1e-9);
        let half = ShFrame::new(f0.coeffs * 0.5);
        assert_abs_diff_eq!(degeneracy_distance(&half), 0.5, epsilon = 1e-7);
    }

    #[test]
    fn degeneracy_distance_is_rotation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut q = Coeffs::zeros();
        for i in 0..9 {
            q[i] = rng.random::<f64>() - 0.5;
        }
        let q = ShFrame::new(q);
        let d0 = degeneracy_distance(&q);
        for _ in 0..3 {
            let rot = exp_rotation(&random_rotation(&mut rng));
            let d = degeneracy_distance(&ShFrame::new(rot * q.coeffs));
            assert_abs_diff_eq!(d, d0, epsilon = 1e-6);
        }
    }

    #[test]
    fn projection_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..5 {
            let mut q = Coeffs::zeros();
            for i in 0..9 {
                q[i] = rng.random::<f64>() - 0.5;
            }
            let p = project_to_variety(&ShFrame::new(q));
            let p2 = project_to_variety(&p.frame);
            assert!(
                (p2.frame.coeffs - p.frame.coeffs).norm() < 1e-9,
                "projection moved a variety point by {}",
                (p2.frame.coeffs - p.frame.coeffs).norm()
            );
        }
    }

    #[test]
    fn extracts_canonical_cross() {
        let cross = extract_cross(&canonical_frame(), &Vector3::z()).unwrap();
        assert_abs_diff_eq!(cross.theta, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cross.scale, 1.0, epsilon = 1e-12);
        assert!((cross.dirs[0] - Vector3::x()).norm() < 1e-12);
        assert!((cross.dirs[1] - Vector3::y()).norm() < 1e-12);
    }

    #[test]
    fn extraction_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let n = random_rotation(&mut rng).normalize();
            let theta = rng.random::<f64>() * std::f64::consts::TAU;
            let scale = 0.2 + 0.8 * rng.random::<f64>();
            let f = aligned_frame(&n, theta, scale);
            let cross = extract_cross(&f, &n).unwrap();
            let expected = theta.rem_euclid(std::f64::consts::FRAC_PI_2);
            let dt = (cross.theta - expected).abs();
            let dt = dt.min(std::f64::consts::FRAC_PI_2 - dt);
            assert!(dt < 1e-8, "theta error {dt}");
            assert_abs_diff_eq!(cross.scale, scale, epsilon = 1e-8);
            assert!(cross.dirs[0].dot(&n).abs() < 1e-10);
            assert!(cross.dirs[0].dot(&cross.dirs[1]).abs() < 1e-10);
        }
    }

    #[test]
    fn halved_tangential_halves_scale() {
        let n = Vector3::new(0.3, -0.4, 0.86).normalize();
        let theta = 0.2;
        let full = aligned_frame(&n, theta, 1.0);
        let op = alignment_operator(&n);
        // halve the two tangential coefficients in z-aligned coordinates
        let mut zc = op.rotation_to_z * full.coeffs;
        zc[0] *= 0.5;
        zc[8] *= 0.5;
        let halved = ShFrame::new(op.rotation_to_z.transpose() * zc);
        let cross = extract_cross(&halved, &n).unwrap();
        assert_abs_diff_eq!(cross.scale, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(cross.theta, 0.2, epsilon = 1e-10);
    }

    #[test]
    fn degenerate_tangential_is_an_error() {
        let f = ShFrame::new(Lobe::reference().coeffs);
        assert!(matches!(
            extract_cross(&f, &Vector3::z()),
            Err(ExtractError::DegenerateTangential { .. })
        ));
    }

    #[test]
    fn reconstruction_matches_twist_path() {
        let f = aligned_frame(&Vector3::z(), 0.2, 1.0);
        let expected = crate::sh::twist_z(0.2);
        assert!((f.coeffs - expected.coeffs).norm() < 1e-12);
    }
}
