//! Post-solve field analysis: cross extraction over a mesh, singularity
//! indices, crease-alignment metrics, the soft-alignment deviation
//! experiment, and geometry exports.
//!
//! The inter-face comparison uses hinge transport: the tangent plane of one
//! face is rotated about the shared edge onto its neighbor, and cross angles
//! are matched modulo the quarter-turn symmetry. Around an interior vertex
//! the matched rotations plus the angle defect add up to an integer multiple
//! of `pi/2`, giving the quarter-integer singularity index; summed over a
//! closed mesh they recover the Euler characteristic.

use crate::energy::FrameField;
use crate::mesh::SurfaceMesh;
use crate::sh::Coeffs;
use crate::variety::{self, ExtractedCross};
use nalgebra::{Rotation3, Vector3};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Per-face cross extraction; degenerate faces are reported, not filled.
#[derive(Debug, Clone)]
pub struct FieldExtraction {
    pub crosses: Vec<Option<ExtractedCross>>,
    pub degenerate_faces: Vec<usize>,
}

pub fn extract_field(mesh: &SurfaceMesh, field: &FrameField) -> FieldExtraction {
    let mut crosses = Vec::with_capacity(mesh.n_faces());
    let mut degenerate = Vec::new();
    for face in 0..mesh.n_faces() {
        match variety::extract_cross(&field[face], &mesh.face_normals[face]) {
            Ok(c) => crosses.push(Some(c)),
            Err(_) => {
                crosses.push(None);
                degenerate.push(face);
            }
        }
    }
    FieldExtraction {
        crosses,
        degenerate_faces: degenerate,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularityRecord {
    pub vertex: usize,
    /// Index in quarter turns (4 x index), an exact integer.
    pub index_quarters: i32,
    pub index: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularityReport {
    /// Vertices with nonzero index only.
    pub records: Vec<SingularityRecord>,
    /// Interior vertices whose one-ring contained a degenerate face or whose
    /// accumulated angle failed to land on a quarter turn.
    pub unknown_vertices: Vec<usize>,
    /// Sum of indices over all classified interior vertices.
    pub total_index: f64,
}

/// Hinge rotation taking the tangent plane of `from` onto `to` about their
/// shared edge direction.
fn hinge_transport(
    edge_dir: &Vector3<f64>,
    n_from: &Vector3<f64>,
    n_to: &Vector3<f64>,
) -> Rotation3<f64> {
    let axis = edge_dir.normalize();
    let angle = (n_from.cross(n_to).dot(&axis)).atan2(n_from.dot(n_to));
    Rotation3::from_scaled_axis(axis * angle)
}

/// Signed angle from `a` to `b` about `n`, matched modulo quarter turns to
/// `(-pi/4, pi/4]`; ties at the boundary resolve toward the smaller turn
/// count.
fn matched_angle(a: &Vector3<f64>, b: &Vector3<f64>, n: &Vector3<f64>) -> f64 {
    let raw = a.cross(b).dot(n).atan2(a.dot(b));
    let x = raw / std::f64::consts::FRAC_PI_2;
    let k = (x - 0.5).ceil();
    raw - k * std::f64::consts::FRAC_PI_2
}

/// Computes quarter-integer singularity indices at interior vertices by
/// accumulating matched rotations around each one-ring. Boundary vertices
/// carry no index.
pub fn singularity_indices(
    mesh: &SurfaceMesh,
    crosses: &[Option<ExtractedCross>],
) -> SingularityReport {
    // directed edge (a, b) -> face traversing it
    let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut boundary_vertex = vec![false; mesh.n_vertices()];
    for (fi, f) in mesh.faces.iter().enumerate() {
        for k in 0..3 {
            directed.insert((f[k], f[(k + 1) % 3]), fi);
        }
    }
    for be in &mesh.boundary_edges {
        boundary_vertex[be.verts[0]] = true;
        boundary_vertex[be.verts[1]] = true;
    }
    let mut faces_at_vertex: Vec<Vec<usize>> = vec![Vec::new(); mesh.n_vertices()];
    for (fi, f) in mesh.faces.iter().enumerate() {
        for &v in f {
            faces_at_vertex[v].push(fi);
        }
    }

    let mut records = Vec::new();
    let mut unknown = Vec::new();
    let mut total_index = 0.0;
    for v in 0..mesh.n_vertices() {
        if boundary_vertex[v] || faces_at_vertex[v].is_empty() {
            continue;
        }
        // walk the one-ring counterclockwise: from face [.., v, next, prev..]
        // the neighbor across edge (v, prev) follows
        let ring_len = faces_at_vertex[v].len();
        let start = faces_at_vertex[v][0];
        let mut ring = Vec::with_capacity(ring_len);
        let mut current = start;
        let mut closed = false;
        for _ in 0..ring_len {
            ring.push(current);
            let f = mesh.faces[current];
            let k = f.iter().position(|&x| x == v).unwrap();
            let prev = f[(k + 2) % 3];
            match directed.get(&(v, prev)) {
                Some(&next) => {
                    current = next;
                    if current == start {
                        closed = true;
                        break;
                    }
                }
                None => break,
            }
        }
        if !closed || ring.len() != ring_len {
            unknown.push(v);
            continue;
        }
        if ring.iter().any(|&f| crosses[f].is_none()) {
            unknown.push(v);
            continue;
        }

        let mut angle_sum = 0.0;
        let mut rotation_sum = 0.0;
        for i in 0..ring.len() {
            let fi = ring[i];
            let fj = ring[(i + 1) % ring.len()];
            angle_sum += mesh.corner_angle(fi, v);
            // shared edge between fi and fj through v
            let f = mesh.faces[fi];
            let k = f.iter().position(|&x| x == v).unwrap();
            let shared = f[(k + 2) % 3];
            let edge_dir = mesh.vertices[shared] - mesh.vertices[v];
            let transport = hinge_transport(
                &edge_dir,
                &mesh.face_normals[fi],
                &mesh.face_normals[fj],
            );
            let ci = crosses[fi].as_ref().unwrap();
            let cj = crosses[fj].as_ref().unwrap();
            let moved = transport * ci.dirs[0];
            rotation_sum += matched_angle(&moved, &cj.dirs[0], &mesh.face_normals[fj]);
        }
        let defect = 2.0 * std::f64::consts::PI - angle_sum;
        let index = (defect + rotation_sum) / (2.0 * std::f64::consts::PI);
        let quarters = (4.0 * index).round();
        if (4.0 * index - quarters).abs() > 0.1 {
            unknown.push(v);
            continue;
        }
        total_index += quarters / 4.0;
        if quarters != 0.0 {
            records.push(SingularityRecord {
                vertex: v,
                index_quarters: quarters as i32,
                index: quarters / 4.0,
            });
        }
    }
    SingularityReport {
        records,
        unknown_vertices: unknown,
        total_index,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CreaseEdgeScore {
    pub verts: [usize; 2],
    pub faces: [usize; 2],
    pub dihedral_deviation: f64,
    /// Worst of the two sides' best cross-to-edge angles, in `[0, pi/4]`.
    pub angle: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CreaseAlignmentReport {
    pub crease_angle_threshold: f64,
    pub edges: Vec<CreaseEdgeScore>,
    pub max_angle: f64,
    pub mean_angle: f64,
}

/// Angle between the edge direction and the nearest cross direction of one
/// face, folded to `[0, pi/4]`.
fn side_angle(cross: &ExtractedCross, edge_dir: &Vector3<f64>) -> f64 {
    let e = edge_dir.normalize();
    let a0 = cross.dirs[0].dot(&e).abs().clamp(0.0, 1.0).acos();
    let a1 = cross.dirs[1].dot(&e).abs().clamp(0.0, 1.0).acos();
    a0.min(a1)
}

/// Scores crease alignment: creases are interior edges whose dihedral
/// deviates from flat by more than the threshold (default `pi/6`); each gets
/// the worse of its two sides' nearest-direction angles.
pub fn crease_alignment_score(
    mesh: &SurfaceMesh,
    crosses: &[Option<ExtractedCross>],
    crease_angle_threshold: f64,
) -> CreaseAlignmentReport {
    let mut edges = Vec::new();
    for e in &mesh.interior_edges {
        let [t1, t2] = e.faces;
        let deviation = mesh.face_normals[t1]
            .dot(&mesh.face_normals[t2])
            .clamp(-1.0, 1.0)
            .acos();
        if deviation <= crease_angle_threshold {
            continue;
        }
        let (Some(c1), Some(c2)) = (&crosses[t1], &crosses[t2]) else {
            continue;
        };
        let dir = mesh.vertices[e.verts[1]] - mesh.vertices[e.verts[0]];
        let angle = side_angle(c1, &dir).max(side_angle(c2, &dir));
        edges.push(CreaseEdgeScore {
            verts: e.verts,
            faces: e.faces,
            dihedral_deviation: deviation,
            angle,
        });
    }
    let max_angle = edges.iter().map(|e| e.angle).fold(0.0, f64::max);
    let mean_angle = if edges.is_empty() {
        0.0
    } else {
        edges.iter().map(|e| e.angle).sum::<f64>() / edges.len() as f64
    };
    CreaseAlignmentReport {
        crease_angle_threshold,
        edges,
        max_angle,
        mean_angle,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DeviationPoint {
    pub epsilon: f64,
    pub max_deviation_deg: f64,
}

/// Measures how far an epsilon-perturbation of a z-aligned frame can tilt
/// the extracted frame axis: samples uniform perturbations of the 7
/// constrained components with magnitude at most epsilon, projects back to
/// the variety, and records the worst axis deviation per epsilon. Sample
/// directions and radius fractions are shared across the grid so the sample
/// sets nest as epsilon grows.
pub fn normal_deviation_experiment(
    eps_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Vec<DeviationPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dirs: Vec<[f64; 7]> = Vec::with_capacity(samples);
    let mut radii: Vec<f64> = Vec::with_capacity(samples);
    for i in 0..samples {
        let mut d = [0.0f64; 7];
        let mut norm_sq = 0.0;
        for v in &mut d {
            // Box-Muller for an isotropic direction
            let u1: f64 = rng.random::<f64>().max(1e-300);
            let u2: f64 = rng.random();
            *v = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
            norm_sq += *v * *v;
        }
        let norm = norm_sq.sqrt().max(1e-300);
        for v in &mut d {
            *v /= norm;
        }
        dirs.push(d);
        // ball-uniform radii, with a boundary sample mixed in every 8th draw
        let r = if i % 8 == 0 {
            1.0
        } else {
            rng.random::<f64>().powf(1.0 / 7.0)
        };
        radii.push(r);
    }

    let f0 = crate::sh::canonical_frame();
    eps_grid
        .iter()
        .map(|&eps| {
            let mut worst = 0.0f64;
            if eps > 0.0 {
                for (d, &r) in dirs.iter().zip(&radii) {
                    let mut q = Coeffs::zeros();
                    for (k, &v) in d.iter().enumerate() {
                        q[k + 1] = eps * r * v;
                    }
                    q += f0.coeffs;
                    let projected = variety::project_with_hint(
                        &crate::sh::ShFrame::new(q),
                        &nalgebra::Matrix3::identity(),
                    );
                    // nearest frame axis to z
                    let r3 = projected.rotation;
                    let best = (0..3)
                        .map(|k| r3[(2, k)].abs())
                        .fold(0.0f64, f64::max)
                        .clamp(0.0, 1.0);
                    worst = worst.max(best.acos());
                }
            }
            DeviationPoint {
                epsilon: eps,
                max_deviation_deg: worst.to_degrees(),
            }
        })
        .collect()
}

/// ASCII PLY with two line segments per face (four endpoints), sized by
/// 0.4 x the mean incident edge length and the tangential scale.
pub fn crosses_to_ply(mesh: &SurfaceMesh, crosses: &[Option<ExtractedCross>]) -> String {
    let mut verts: Vec<Vector3<f64>> = Vec::new();
    let mut segs: Vec<[usize; 2]> = Vec::new();
    for face in 0..mesh.n_faces() {
        let Some(cross) = &crosses[face] else {
            continue;
        };
        let f = mesh.faces[face];
        let mean_edge = ((mesh.vertices[f[0]] - mesh.vertices[f[1]]).norm()
            + (mesh.vertices[f[1]] - mesh.vertices[f[2]]).norm()
            + (mesh.vertices[f[2]] - mesh.vertices[f[0]]).norm())
            / 3.0;
        let half = 0.2 * mean_edge * cross.scale;
        let c = mesh.face_barycenter(face).coords;
        for dir in &cross.dirs {
            let a = c - dir * half;
            let b = c + dir * half;
            verts.push(a);
            verts.push(b);
            segs.push([verts.len() - 2, verts.len() - 1]);
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "ply");
    let _ = writeln!(s, "format ascii 1.0");
    let _ = writeln!(s, "element vertex {}", verts.len());
    let _ = writeln!(s, "property double x");
    let _ = writeln!(s, "property double y");
    let _ = writeln!(s, "property double z");
    let _ = writeln!(s, "element edge {}", segs.len());
    let _ = writeln!(s, "property int vertex1");
    let _ = writeln!(s, "property int vertex2");
    let _ = writeln!(s, "end_header");
    for v in &verts {
        let _ = writeln!(s, "{:.16e} {:.16e} {:.16e}", v.x, v.y, v.z);
    }
    for seg in &segs {
        let _ = writeln!(s, "{} {}", seg[0], seg[1]);
    }
    s
}
