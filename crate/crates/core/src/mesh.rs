//! Triangle-mesh ingestion, validation, adjacency, and dual-edge weights.
//!
//! Meshes are immutable after construction. Normals are always recomputed
//! from CCW cross products; authored normals in OBJ files are ignored since
//! the method depends on consistent orientation rather than shading data.
//! Boundary edges carry no energy term (natural boundary conditions).

use nalgebra::{Point3, Vector3};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("non-manifold edges (more than two incident faces): {0:?}")]
    NonManifold(Vec<(usize, usize)>),
    #[error("inconsistent or non-orientable face orientation at edges: {0:?}")]
    NonOrientable(Vec<(usize, usize)>),
    #[error("degenerate (zero-area) face {0}")]
    DegenerateFace(usize),
    #[error("coincident barycenters across edge ({0}, {1})")]
    CoincidentBarycenters(usize, usize),
    #[error("mesh has no faces")]
    Empty,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// An interior edge together with its dual-Laplacian weight
/// `w = |e| / |barycenter(t1) - barycenter(t2)|`.
#[derive(Debug, Clone)]
pub struct InteriorEdge {
    pub verts: [usize; 2],
    pub faces: [usize; 2],
    pub weight: f64,
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct BoundaryEdge {
    pub verts: [usize; 2],
    pub face: usize,
}

/// An indexed triangle mesh with per-face unit normals and edge adjacency.
/// Edge-manifold and consistently oriented by construction.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    pub vertices: Vec<Point3<f64>>,
    pub faces: Vec<[usize; 3]>,
    pub face_normals: Vec<Vector3<f64>>,
    pub interior_edges: Vec<InteriorEdge>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub euler_characteristic: i64,
}

/// Mesh statistics for the `stats` JSON output.
#[derive(Debug, Clone, Serialize)]
pub struct MeshStats {
    pub n_vertices: usize,
    pub n_faces: usize,
    pub n_edges: usize,
    pub n_interior_edges: usize,
    pub n_boundary_edges: usize,
    pub euler_characteristic: i64,
    pub is_closed: bool,
    pub total_area: f64,
    pub bbox_min: [f64; 3],
    pub bbox_max: [f64; 3],
}

impl SurfaceMesh {
    /// Validates connectivity and builds adjacency, normals, and weights.
    pub fn build(vertices: Vec<Point3<f64>>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if faces.is_empty() {
            return Err(MeshError::Empty);
        }
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                if v >= vertices.len() {
                    return Err(MeshError::Parse {
                        line: 0,
                        message: format!("face {fi} references vertex {v} out of range"),
                    });
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(MeshError::DegenerateFace(fi));
            }
        }

        let scale = bbox_diag(&vertices).max(1e-300);
        let mut face_normals = Vec::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            let a = vertices[f[0]];
            let b = vertices[f[1]];
            let c = vertices[f[2]];
            let n = (b - a).cross(&(c - a));
            if n.norm() < 1e-12 * scale * scale {
                return Err(MeshError::DegenerateFace(fi));
            }
            face_normals.push(n.normalize());
        }

        // directed-edge map: (a, b) -> face; manifoldness and orientation
        // both fall out of counting directed occurrences
        let mut directed: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                directed
                    .entry((f[k], f[(k + 1) % 3]))
                    .or_default()
                    .push(fi);
            }
        }
        let mut non_manifold = Vec::new();
        let mut non_orientable = Vec::new();
        let mut interior_edges = Vec::new();
        let mut boundary_edges = Vec::new();
        let mut n_edges = 0usize;
        for (&(a, b), fwd) in &directed {
            // visit each undirected edge once: from its low key when both
            // directions occur, otherwise from the only key present
            if a > b && directed.contains_key(&(b, a)) {
                continue;
            }
            n_edges += 1;
            let rev = directed.get(&(b, a)).map(Vec::as_slice).unwrap_or(&[]);
            let total = fwd.len() + rev.len();
            if total > 2 {
                non_manifold.push((a.min(b), a.max(b)));
            } else if total == 2 {
                if fwd.len() != 1 {
                    // both faces traverse the edge in the same direction
                    non_orientable.push((a.min(b), a.max(b)));
                } else {
                    interior_edges.push((a, b, fwd[0], rev[0]));
                }
            } else {
                boundary_edges.push(BoundaryEdge {
                    verts: [a, b],
                    face: fwd[0],
                });
            }
        }
        if !non_manifold.is_empty() {
            non_manifold.truncate(16);
            return Err(MeshError::NonManifold(non_manifold));
        }
        if !non_orientable.is_empty() {
            non_orientable.truncate(16);
            return Err(MeshError::NonOrientable(non_orientable));
        }

        let barycenter = |fi: usize| -> Vector3<f64> {
            let f = faces[fi];
            (vertices[f[0]].coords + vertices[f[1]].coords + vertices[f[2]].coords) / 3.0
        };
        let mut edges = Vec::with_capacity(interior_edges.len());
        for (a, b, t1, t2) in interior_edges {
            let len = (vertices[a] - vertices[b]).norm();
            let dual = (barycenter(t1) - barycenter(t2)).norm();
            if dual < 1e-12 * scale {
                return Err(MeshError::CoincidentBarycenters(t1, t2));
            }
            edges.push(InteriorEdge {
                verts: [a, b],
                faces: [t1, t2],
                weight: len / dual,
                length: len,
            });
        }

        let euler_characteristic = vertices.len() as i64 - n_edges as i64 + faces.len() as i64;
        Ok(Self {
            vertices,
            faces,
            face_normals,
            interior_edges: edges,
            boundary_edges,
            euler_characteristic,
        })
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_edges.is_empty()
    }

    pub fn face_barycenter(&self, fi: usize) -> Point3<f64> {
        let f = self.faces[fi];
        Point3::from(
            (self.vertices[f[0]].coords + self.vertices[f[1]].coords + self.vertices[f[2]].coords)
                / 3.0,
        )
    }

    pub fn face_area(&self, fi: usize) -> f64 {
        let f = self.faces[fi];
        let a = self.vertices[f[0]];
        0.5 * (self.vertices[f[1]] - a)
            .cross(&(self.vertices[f[2]] - a))
            .norm()
    }

    /// Interior angle of face `fi` at vertex `v`.
    pub fn corner_angle(&self, fi: usize, v: usize) -> f64 {
        let f = self.faces[fi];
        let k = f.iter().position(|&x| x == v).expect("vertex not in face");
        let p = self.vertices[f[k]];
        let a = (self.vertices[f[(k + 1) % 3]] - p).normalize();
        let b = (self.vertices[f[(k + 2) % 3]] - p).normalize();
        a.dot(&b).clamp(-1.0, 1.0).acos()
    }

    /// Sum of `2 pi - angle sum` over all vertices; equals `2 pi chi` for
    /// closed meshes (discrete Gauss-Bonnet).
    pub fn total_angle_defect(&self) -> f64 {
        let mut angle_sum = vec![0.0f64; self.vertices.len()];
        for (fi, f) in self.faces.iter().enumerate() {
            for &v in f {
                angle_sum[v] += self.corner_angle(fi, v);
            }
        }
        angle_sum
            .iter()
            .map(|&s| 2.0 * std::f64::consts::PI - s)
            .sum()
    }

    pub fn stats(&self) -> MeshStats {
        let mut bbox_min = [f64::INFINITY; 3];
        let mut bbox_max = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for k in 0..3 {
                bbox_min[k] = bbox_min[k].min(v[k]);
                bbox_max[k] = bbox_max[k].max(v[k]);
            }
        }
        MeshStats {
            n_vertices: self.vertices.len(),
            n_faces: self.faces.len(),
            n_edges: self.interior_edges.len() + self.boundary_edges.len(),
            n_interior_edges: self.interior_edges.len(),
            n_boundary_edges: self.boundary_edges.len(),
            euler_characteristic: self.euler_characteristic,
            is_closed: self.is_closed(),
            total_area: (0..self.faces.len()).map(|f| self.face_area(f)).sum(),
            bbox_min,
            bbox_max,
        }
    }

    /// Canonical ASCII OBJ form: `v` records at 17 significant digits, then
    /// 1-indexed `f` records. Reloading the output reproduces it byte for
    /// byte.
    pub fn to_obj_string(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            let _ = writeln!(s, "v {:.16e} {:.16e} {:.16e}", v.x, v.y, v.z);
        }
        for f in &self.faces {
            let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
        s
    }

    pub fn write_obj(&self, path: &Path) -> Result<(), MeshError> {
        std::fs::write(path, self.to_obj_string())?;
        Ok(())
    }
}

fn bbox_diag(vertices: &[Point3<f64>]) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for v in vertices {
        for k in 0..3 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2) + (hi[2] - lo[2]).powi(2)).sqrt()
}

/// Loads an ASCII OBJ file. Only `v` and `f` records are used; polygon faces
/// are fan-triangulated with a warning, authored normals are discarded.
pub fn load_obj(path: &Path) -> Result<SurfaceMesh, MeshError> {
    let text = std::fs::read_to_string(path)?;
    parse_obj(&text)
}

pub fn parse_obj(text: &str) -> Result<SurfaceMesh, MeshError> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut fanned = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                let mut coord = [0.0f64; 3];
                for c in &mut coord {
                    let t = tok.next().ok_or_else(|| MeshError::Parse {
                        line: lineno,
                        message: "vertex record needs 3 coordinates".into(),
                    })?;
                    *c = t.parse().map_err(|_| MeshError::Parse {
                        line: lineno,
                        message: format!("bad coordinate `{t}`"),
                    })?;
                }
                vertices.push(Point3::new(coord[0], coord[1], coord[2]));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for t in tok {
                    // accept v, v/vt, v/vt/vn, v//vn forms
                    let first = t.split('/').next().unwrap_or("");
                    let i: i64 = first.parse().map_err(|_| MeshError::Parse {
                        line: lineno,
                        message: format!("bad face index `{t}`"),
                    })?;
                    let resolved = if i > 0 {
                        (i - 1) as usize
                    } else if i < 0 && vertices.len() as i64 + i >= 0 {
                        (vertices.len() as i64 + i) as usize
                    } else {
                        return Err(MeshError::Parse {
                            line: lineno,
                            message: format!("face index {i} out of range"),
                        });
                    };
                    idx.push(resolved);
                }
                if idx.len() < 3 {
                    return Err(MeshError::Parse {
                        line: lineno,
                        message: "face needs at least 3 vertices".into(),
                    });
                }
                if idx.len() > 3 {
                    fanned += 1;
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            // ignore normals, texcoords, groups, materials
            Some(_) => {}
            None => {}
        }
    }
    if fanned > 0 {
        log::warn!("fan-triangulated {fanned} polygon faces");
    }
    SurfaceMesh::build(vertices, faces)
}

/// Procedural meshes used by tests, benchmarks, and the CLI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CanonicalMesh {
    /// Cube surface `[-1,1]^3`, `n` segments per edge, `12 n^2` triangles.
    Cube { n: usize },
    /// Two rectangular strips meeting along a straight crease on the x-axis
    /// with the given dihedral angle (`pi` is flat).
    Wedge { dihedral: f64, n: usize },
    /// [`CanonicalMesh::Cube`] with Gaussian vertex jitter.
    NoisyCube { sigma: f64, seed: u64, n: usize },
    /// Planar unit square, `n x n x 2` triangles.
    FlatGrid { n: usize },
    /// Boundary of the intersection of three orthogonal unit cylinders,
    /// obtained by radial projection of a subdivided cube.
    Cylinder3 { n: usize },
    /// Icosahedron with `n` rounds of loop subdivision, on the unit sphere.
    Icosphere { n: usize },
}

pub fn make_canonical_mesh(kind: &CanonicalMesh) -> Result<SurfaceMesh, MeshError> {
    match *kind {
        CanonicalMesh::Cube { n } => cube(n, None),
        CanonicalMesh::Wedge { dihedral, n } => wedge(dihedral, n),
        CanonicalMesh::NoisyCube { sigma, seed, n } => cube(n, Some((sigma, seed))),
        CanonicalMesh::FlatGrid { n } => flat_grid(n),
        CanonicalMesh::Cylinder3 { n } => cylinder3(n),
        CanonicalMesh::Icosphere { n } => icosphere(n),
    }
}

/// Grid-based cube builder; vertices deduplicated across edges and corners
/// by their integer lattice coordinates.
fn cube(n: usize, noise: Option<(f64, u64)>) -> Result<SurfaceMesh, MeshError> {
    if n == 0 {
        return Err(MeshError::InvalidParameter("cube subdivision must be >= 1".into()));
    }
    let mut verts: Vec<Point3<f64>> = Vec::new();
    let mut index: BTreeMap<(i64, i64, i64), usize> = BTreeMap::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let ni = n as i64;
    let mut vertex = |key: (i64, i64, i64)| -> usize {
        *index.entry(key).or_insert_with(|| {
            let p = Point3::new(
                -1.0 + 2.0 * key.0 as f64 / ni as f64,
                -1.0 + 2.0 * key.1 as f64 / ni as f64,
                -1.0 + 2.0 * key.2 as f64 / ni as f64,
            );
            verts.push(p);
            verts.len() - 1
        })
    };
    // each face: outward normal along `axis * sign`; u, v are the remaining
    // axes ordered so that (u x v) points outward
    for (axis, sign) in [(0, 1i64), (0, -1), (1, 1), (1, -1), (2, 1), (2, -1)] {
        let (ua, va) = match (axis, sign > 0) {
            (0, true) => (1, 2),
            (0, false) => (2, 1),
            (1, true) => (2, 0),
            (1, false) => (0, 2),
            (2, true) => (0, 1),
            _ => (1, 0),
        };
        let fixed = if sign > 0 { ni } else { 0 };
        for iu in 0..ni {
            for iv in 0..ni {
                let mut corner = |du: i64, dv: i64| {
                    let mut key = [0i64; 3];
                    key[axis] = fixed;
                    key[ua] = iu + du;
                    key[va] = iv + dv;
                    vertex((key[0], key[1], key[2]))
                };
                let (a, b, c, d) = (corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1));
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            }
        }
    }
    if let Some((sigma, seed)) = noise {
        if sigma < 0.0 {
            return Err(MeshError::InvalidParameter("noise sigma must be >= 0".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in &mut verts {
            for k in 0..3 {
                v[k] += sigma * gaussian(&mut rng);
            }
        }
    }
    SurfaceMesh::build(verts, faces)
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn wedge(dihedral: f64, n: usize) -> Result<SurfaceMesh, MeshError> {
    if !(0.0..std::f64::consts::PI).contains(&dihedral) || dihedral <= 0.0 {
        return Err(MeshError::InvalidParameter(format!(
            "wedge dihedral must be in (0, pi), got {dihedral}"
        )));
    }
    if n == 0 {
        return Err(MeshError::InvalidParameter("wedge subdivision must be >= 1".into()));
    }
    // strips span s in [0, 1] at tilt beta from the xy-plane, meeting along
    // the x-axis with interior dihedral angle `dihedral`
    let beta = (std::f64::consts::PI - dihedral) / 2.0;
    let length = 2.0;
    let mut verts = Vec::new();
    let mut faces = Vec::new();
    let cols = n + 1;
    // crease row (s = 0) shared between the strips
    for i in 0..=n {
        verts.push(Point3::new(length * i as f64 / n as f64, 0.0, 0.0));
    }
    let mut strip = |dir_y: f64, flip: bool| {
        let base = verts.len();
        for j in 1..=n {
            let s = j as f64 / n as f64;
            for i in 0..=n {
                verts.push(Point3::new(
                    length * i as f64 / n as f64,
                    dir_y * s * beta.cos(),
                    s * beta.sin(),
                ));
            }
        }
        let row = |j: usize, i: usize| -> usize {
            if j == 0 {
                i
            } else {
                base + (j - 1) * cols + i
            }
        };
        for j in 0..n {
            for i in 0..n {
                let (a, b, c, d) = (row(j, i), row(j, i + 1), row(j + 1, i + 1), row(j + 1, i));
                if flip {
                    faces.push([a, c, b]);
                    faces.push([a, d, c]);
                } else {
                    faces.push([a, b, c]);
                    faces.push([a, c, d]);
                }
            }
        }
    };
    strip(1.0, false);
    strip(-1.0, true);
    SurfaceMesh::build(verts, faces)
}

fn flat_grid(n: usize) -> Result<SurfaceMesh, MeshError> {
    if n == 0 {
        return Err(MeshError::InvalidParameter("grid subdivision must be >= 1".into()));
    }
    let mut verts = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            verts.push(Point3::new(i as f64 / n as f64, j as f64 / n as f64, 0.0));
        }
    }
    let mut faces = Vec::new();
    let at = |i: usize, j: usize| j * (n + 1) + i;
    for j in 0..n {
        for i in 0..n {
            faces.push([at(i, j), at(i + 1, j), at(i + 1, j + 1)]);
            faces.push([at(i, j), at(i + 1, j + 1), at(i, j + 1)]);
        }
    }
    SurfaceMesh::build(verts, faces)
}

/// Radius of the tricylinder boundary along unit direction `u`:
/// the largest of the three cylinder radii must reach 1.
fn tricylinder_radius(u: &Vector3<f64>) -> f64 {
    let rz = (u.x * u.x + u.y * u.y).sqrt();
    let ry = (u.x * u.x + u.z * u.z).sqrt();
    let rx = (u.y * u.y + u.z * u.z).sqrt();
    1.0 / rz.max(ry).max(rx)
}

fn cylinder3(n: usize) -> Result<SurfaceMesh, MeshError> {
    let mut mesh = cube(n.max(2), None)?;
    let verts = mesh
        .vertices
        .iter()
        .map(|p| {
            let u = p.coords.normalize();
            Point3::from(u * tricylinder_radius(&u))
        })
        .collect();
    mesh = SurfaceMesh::build(verts, mesh.faces)?;
    Ok(mesh)
}

fn icosphere(subdivisions: usize) -> Result<SurfaceMesh, MeshError> {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut verts: Vec<Point3<f64>> = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ]
    .iter()
    .map(|c| Point3::from(Vector3::new(c[0], c[1], c[2]).normalize()))
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut new_faces = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mid = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                mid[k] = *midpoint.entry(key).or_insert_with(|| {
                    let p = (verts[a].coords + verts[b].coords).normalize();
                    verts.push(Point3::from(p));
                    verts.len() - 1
                });
            }
            new_faces.push([f[0], mid[0], mid[2]]);
            new_faces.push([f[1], mid[1], mid[0]]);
            new_faces.push([f[2], mid[2], mid[1]]);
            new_faces.push([mid[0], mid[1], mid[2]]);
        }
        faces = new_faces;
    }
    SurfaceMesh::build(verts, faces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn unit_cube_combinatorics() {
        let m = make_canonical_mesh(&CanonicalMesh::Cube { n: 1 }).unwrap();
        assert_eq!(m.n_vertices(), 8);
        assert_eq!(m.n_faces(), 12);
        assert_eq!(m.interior_edges.len(), 18);
        assert!(m.boundary_edges.is_empty());
        assert_eq!(m.euler_characteristic, 2);
    }

    #[test]
    fn cube_normals_point_outward() {
        let m = make_canonical_mesh(&CanonicalMesh::Cube { n: 2 }).unwrap();
        for fi in 0..m.n_faces() {
            let c = m.face_barycenter(fi);
            assert!(m.face_normals[fi].dot(&c.coords) > 0.0, "inward normal on face {fi}");
        }
    }

    #[test]
    fn single_triangle_is_all_boundary() {
        let verts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        let m = SurfaceMesh::build(verts, vec![[0, 1, 2]]).unwrap();
        assert_eq!(m.interior_edges.len(), 0);
        assert_eq!(m.boundary_edges.len(), 3);
    }

    #[test]
    fn square_pair_weight() {
        // two unit right triangles sharing the diagonal of a unit square:
        // |e| = sqrt(2), dual length = sqrt(2)/3, weight = 3
        let verts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        let m = SurfaceMesh::build(verts, vec![[0, 1, 2], [0, 2, 3]]).unwrap();
        assert_eq!(m.interior_edges.len(), 1);
        assert_abs_diff_eq!(m.interior_edges[0].weight, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn equilateral_pair_weight() {
        let h = 3.0f64.sqrt() / 2.0;
        let verts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.5, h, 0.0),
            Point3::new(0.5, -h, 0.0),
        ];
        let m = SurfaceMesh::build(verts, vec![[0, 1, 2], [0, 3, 1]]).unwrap();
        assert_abs_diff_eq!(m.interior_edges[0].weight, 3.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn weights_are_scale_invariant() {
        let a = make_canonical_mesh(&CanonicalMesh::Cube { n: 2 }).unwrap();
        let scaled: Vec<_> = a.vertices.iter().map(|p| Point3::from(p.coords * 3.7)).collect();
        let b = SurfaceMesh::build(scaled, a.faces.clone()).unwrap();
        for (ea, eb) in a.interior_edges.iter().zip(&b.interior_edges) {
            assert_abs_diff_eq!(ea.weight, eb.weight, epsilon = 1e-12);
        }
    }

    #[test]
    fn non_manifold_edge_is_rejected() {
        let verts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
            Point3::new(1.0, 1.0, 1.0),
        ];
        let faces = vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]];
        assert!(matches!(
            SurfaceMesh::build(verts, faces),
            Err(MeshError::NonManifold(_))
        ));
    }

    #[test]
    fn inconsistent_orientation_is_rejected() {
        let verts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        // both faces traverse the shared edge as 2 -> 0
        let faces = vec![[0, 1, 2], [2, 0, 3]];
        assert!(matches!(
            SurfaceMesh::build(verts, faces),
            Err(MeshError::NonOrientable(_))
        ));
    }

    #[test]
    fn coincident_barycenters_are_rejected() {
        // two valid faces over the same edge whose free vertices coincide
        let verts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.5, 1.0, 0.0),
            Point3::new(0.5, 1.0, 0.0),
        ];
        let faces = vec![[0, 1, 2], [1, 0, 3]];
        assert!(matches!(
            SurfaceMesh::build(verts, faces),
            Err(MeshError::CoincidentBarycenters(_, _))
        ));
    }

    #[test]
    fn degenerate_face_is_rejected() {
        let verts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
        ];
        assert!(matches!(
            SurfaceMesh::build(verts, vec![[0, 1, 2]]),
            Err(MeshError::DegenerateFace(0))
        ));
    }

    #[test]
    fn gauss_bonnet_on_closed_meshes() {
        for kind in [
            CanonicalMesh::Cube { n: 3 },
            CanonicalMesh::Cylinder3 { n: 6 },
            CanonicalMesh::Icosphere { n: 2 },
            CanonicalMesh::NoisyCube { sigma: 0.05, seed: 7, n: 4 },
        ] {
            let m = make_canonical_mesh(&kind).unwrap();
            assert!(m.is_closed());
            let defect = m.total_angle_defect();
            assert_abs_diff_eq!(
                defect,
                2.0 * std::f64::consts::PI * m.euler_characteristic as f64,
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn wedge_has_straight_crease() {
        let m = make_canonical_mesh(&CanonicalMesh::Wedge {
            dihedral: std::f64::consts::FRAC_PI_2,
            n: 4,
        })
        .unwrap();
        assert_eq!(m.n_faces(), 64);
        let n0 = m.face_normals[0];
        let distinct = m
            .face_normals
            .iter()
            .filter(|n| (*n - n0).norm() > 1e-9)
            .count();
        assert!(distinct > 0 && distinct < m.n_faces());
        // dihedral between the two sides is pi/2
        let other = m.face_normals.iter().find(|n| (*n - n0).norm() > 1e-9).unwrap();
        assert_abs_diff_eq!(n0.dot(other), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn noisy_cube_is_reproducible() {
        let a = make_canonical_mesh(&CanonicalMesh::NoisyCube { sigma: 0.05, seed: 7, n: 3 }).unwrap();
        let b = make_canonical_mesh(&CanonicalMesh::NoisyCube { sigma: 0.05, seed: 7, n: 3 }).unwrap();
        for (va, vb) in a.vertices.iter().zip(&b.vertices) {
            assert_eq!(va, vb);
        }
        let c = make_canonical_mesh(&CanonicalMesh::NoisyCube { sigma: 0.05, seed: 8, n: 3 }).unwrap();
        assert!(a.vertices.iter().zip(&c.vertices).any(|(x, y)| x != y));
    }

    #[test]
    fn obj_round_trip_is_byte_idempotent() {
        let m = make_canonical_mesh(&CanonicalMesh::NoisyCube { sigma: 0.03, seed: 1, n: 2 }).unwrap();
        let once = m.to_obj_string();
        let reloaded = parse_obj(&once).unwrap();
        assert_eq!(once, reloaded.to_obj_string());
    }

    #[test]
    fn obj_parser_reports_line_numbers() {
        let err = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 zzz\nf 1 2 3\n").unwrap_err();
        match err {
            MeshError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn obj_parser_fans_polygons() {
        let m = parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();
        assert_eq!(m.n_faces(), 2);
    }

    #[test]
    fn flat_grid_counts() {
        let m = make_canonical_mesh(&CanonicalMesh::FlatGrid { n: 3 }).unwrap();
        assert_eq!(m.n_faces(), 18);
        assert_eq!(m.n_vertices(), 16);
        assert!(!m.is_closed());
    }

    #[test]
    fn cylinder3_is_closed_genus_zero() {
        let m = make_canonical_mesh(&CanonicalMesh::Cylinder3 { n: 8 }).unwrap();
        assert!(m.is_closed());
        assert_eq!(m.euler_characteristic, 2);
        // all vertices lie on the tricylinder boundary
        for v in &m.vertices {
            let u = v.coords.normalize();
            let r = tricylinder_radius(&u);
            assert_abs_diff_eq!(v.coords.norm(), r, epsilon = 1e-12);
        }
    }
}
