//! Manifest-driven pipeline behind the `octafield` binary: load or build a
//! mesh, assemble, solve with the degeneracy loop, analyze, and export.
//!
//! All floating-point text output is printed at 17 significant digits so
//! artifacts round-trip bit-exactly. Exit codes: 0 success, 1 usage, 2
//! non-convergence (best iterate still written), 3 i/o, 4 mesh validation.

use crate::analysis::{
    crease_alignment_score, crosses_to_ply, extract_field, normal_deviation_experiment,
    singularity_indices,
};
use crate::energy::assemble;
use crate::identities::{run_default_suite, IdentityReport, SuiteConfig};
use crate::mesh::{load_obj, make_canonical_mesh, CanonicalMesh, MeshError, SurfaceMesh};
use crate::sh::{alignment_operator, Coeffs, ShFrame};
use crate::solver::{solve_with_degeneracy_loop, SolveConfig};
use crate::variety;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const FIELD_SCHEMA_VERSION: &str = "1.0";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NON_CONVERGED: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_MESH: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("mesh error: {0}")]
    Mesh(MeshError),
    #[error("solve error: {0}")]
    Solve(#[from] crate::solver::SolveError),
    #[error("solver did not converge within the iteration cap")]
    NonConverged,
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        match e {
            MeshError::Io(io) => CliError::Io(io),
            MeshError::InvalidParameter(msg) => CliError::Usage(msg),
            other => CliError::Mesh(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Mesh(_) => EXIT_MESH,
            CliError::Solve(crate::solver::SolveError::Assembly(_)) => EXIT_USAGE,
            CliError::Solve(_) => EXIT_NON_CONVERGED,
            CliError::NonConverged => EXIT_NON_CONVERGED,
        }
    }
}

/// Where the mesh comes from: a file or a canonical-mesh spec string like
/// `cube:8` or `wedge:2.356`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum MeshSource {
    Path(PathBuf),
    Canonical(String),
}

/// Everything one run needs; echoed verbatim into the output directory.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub input: MeshSource,
    pub config: SolveConfig,
    pub out_dir: PathBuf,
    pub field_schema_version: String,
    pub wall_time_budget_s: Option<f64>,
}

/// Parses `name[:params]` into a canonical mesh. Numeric parameters are
/// comma-separated; sensible defaults cover the common cases.
pub fn parse_canonical(spec: &str) -> Result<CanonicalMesh, CliError> {
    let (name, params) = match spec.split_once(':') {
        Some((n, p)) => (n, p),
        None => (spec, ""),
    };
    let nums: Vec<&str> = if params.is_empty() {
        Vec::new()
    } else {
        params.split(',').collect()
    };
    let usage = |msg: String| CliError::Usage(msg);
    let parse_f = |s: &str| -> Result<f64, CliError> {
        s.parse()
            .map_err(|_| usage(format!("bad numeric parameter `{s}` in `{spec}`")))
    };
    let parse_n = |s: &str| -> Result<usize, CliError> {
        s.parse()
            .map_err(|_| usage(format!("bad integer parameter `{s}` in `{spec}`")))
    };
    match name {
        "cube" => Ok(CanonicalMesh::Cube {
            n: nums.first().map(|s| parse_n(s)).transpose()?.unwrap_or(1),
        }),
        "wedge" => Ok(CanonicalMesh::Wedge {
            dihedral: nums
                .first()
                .map(|s| parse_f(s))
                .transpose()?
                .unwrap_or(3.0 * std::f64::consts::PI / 4.0),
            n: nums.get(1).map(|s| parse_n(s)).transpose()?.unwrap_or(10),
        }),
        "noisy_cube" => Ok(CanonicalMesh::NoisyCube {
            sigma: nums.first().map(|s| parse_f(s)).transpose()?.unwrap_or(0.05),
            seed: nums
                .get(1)
                .map(|s| parse_n(s))
                .transpose()?
                .unwrap_or(7) as u64,
            n: nums.get(2).map(|s| parse_n(s)).transpose()?.unwrap_or(6),
        }),
        "flat_grid" => Ok(CanonicalMesh::FlatGrid {
            n: nums.first().map(|s| parse_n(s)).transpose()?.unwrap_or(8),
        }),
        "cylinder3" => Ok(CanonicalMesh::Cylinder3 {
            n: nums.first().map(|s| parse_n(s)).transpose()?.unwrap_or(12),
        }),
        "icosphere" => Ok(CanonicalMesh::Icosphere {
            n: nums.first().map(|s| parse_n(s)).transpose()?.unwrap_or(2),
        }),
        other => Err(usage(format!(
            "unknown canonical mesh `{other}` (cube, wedge, noisy_cube, flat_grid, cylinder3, icosphere)"
        ))),
    }
}

pub fn load_mesh(source: &MeshSource) -> Result<SurfaceMesh, CliError> {
    match source {
        MeshSource::Path(p) => Ok(load_obj(p)?),
        MeshSource::Canonical(spec) => Ok(make_canonical_mesh(&parse_canonical(spec)?)?),
    }
}

/// One user constraint: either a full 9-vector frame or a tangent direction
/// that gets completed to a frame via normal alignment.
#[derive(Debug, Clone, Deserialize)]
pub struct ConstraintEntry {
    pub face: usize,
    #[serde(default)]
    pub frame: Option<[f64; 9]>,
    #[serde(default)]
    pub direction: Option<[f64; 3]>,
}

/// Converts constraint entries to prescribed frames. A direction is
/// projected into the face's tangent plane and sets the twist angle.
pub fn resolve_constraints(
    mesh: &SurfaceMesh,
    entries: &[ConstraintEntry],
) -> Result<Vec<(usize, ShFrame)>, CliError> {
    let mut out = Vec::with_capacity(entries.len());
    for entry in entries {
        if entry.face >= mesh.n_faces() {
            return Err(CliError::Usage(format!(
                "constraint face {} out of range ({} faces)",
                entry.face,
                mesh.n_faces()
            )));
        }
        let frame = match (&entry.frame, &entry.direction) {
            (Some(c), None) => ShFrame::new(Coeffs::from_row_slice(c)),
            (None, Some(d)) => {
                let n = mesh.face_normals[entry.face];
                let dir = Vector3::new(d[0], d[1], d[2]);
                let tangential = dir - n * dir.dot(&n);
                if tangential.norm() < 1e-9 {
                    return Err(CliError::Usage(format!(
                        "constraint direction on face {} is normal to the face",
                        entry.face
                    )));
                }
                let t = tangential.normalize();
                let op = alignment_operator(&n);
                let r3 = nalgebra::Rotation3::from_scaled_axis(op.axis_angle);
                let e1 = r3 * Vector3::x();
                let theta = e1.cross(&t).dot(&n).atan2(e1.dot(&t));
                variety::aligned_frame(&n, theta, 1.0)
            }
            _ => {
                return Err(CliError::Usage(format!(
                    "constraint on face {} must set exactly one of `frame` or `direction`",
                    entry.face
                )))
            }
        };
        out.push((entry.face, frame));
    }
    Ok(out)
}

pub fn load_constraints(path: &Path, mesh: &SurfaceMesh) -> Result<Vec<(usize, ShFrame)>, CliError> {
    let text = std::fs::read_to_string(path)?;
    let entries: Vec<ConstraintEntry> = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("bad constraints file: {e}")))?;
    resolve_constraints(mesh, &entries)
}

/// serde_json formatter printing every float at 17 significant digits.
struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes a value as JSON with 17-significant-digit floats.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision);
    value.serialize(&mut ser).expect("json serialization");
    String::from_utf8(out).expect("json is utf-8")
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    std::fs::write(path, to_json_string(value))?;
    Ok(())
}

/// Loads a field.json written by [`run_solve`], rejecting unknown major
/// schema versions.
pub fn load_field_json(path: &Path) -> Result<Vec<ShFrame>, CliError> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("bad field file: {e}")))?;
    let version = value["version"]
        .as_str()
        .ok_or_else(|| CliError::Usage("field file missing version".into()))?;
    let major = version.split('.').next().unwrap_or("");
    let expected_major = FIELD_SCHEMA_VERSION.split('.').next().unwrap();
    if major != expected_major {
        return Err(CliError::Usage(format!(
            "unsupported field schema major version {version} (expected {FIELD_SCHEMA_VERSION})"
        )));
    }
    let faces = value["faces"]
        .as_array()
        .ok_or_else(|| CliError::Usage("field file missing faces".into()))?;
    let mut frames = Vec::with_capacity(faces.len());
    for entry in faces {
        let coeffs = entry["frame"]
            .as_array()
            .ok_or_else(|| CliError::Usage("face entry missing frame".into()))?;
        if coeffs.len() != 9 {
            return Err(CliError::Usage("frame must have 9 coefficients".into()));
        }
        let mut c = Coeffs::zeros();
        for (i, v) in coeffs.iter().enumerate() {
            c[i] = v
                .as_f64()
                .ok_or_else(|| CliError::Usage("non-numeric coefficient".into()))?;
        }
        frames.push(ShFrame::new(c));
    }
    Ok(frames)
}

/// Artifacts written by a solve run.
#[derive(Debug)]
pub struct SolveArtifacts {
    pub out_dir: PathBuf,
    pub converged: bool,
    pub objective: f64,
}

/// Full pipeline: load, assemble, solve (with the degeneracy loop), analyze,
/// export. Returns normally even when the solver hits its iteration cap; the
/// caller maps that to exit code 2 after artifacts are on disk.
pub fn run_solve(manifest: &RunManifest) -> Result<SolveArtifacts, CliError> {
    let mesh = load_mesh(&manifest.input)?;
    std::fs::create_dir_all(&manifest.out_dir)?;
    write_json(&manifest.out_dir.join("manifest.json"), manifest)?;

    let outcome = solve_with_degeneracy_loop(&mesh, &manifest.config)?;
    let raw = &outcome.raw_field;
    let report = &outcome.report;

    let extraction = extract_field(&mesh, raw);
    let field_json = json!({
        "version": FIELD_SCHEMA_VERSION,
        "p": manifest.config.p.to_string(),
        "epsilon": manifest.config.epsilon,
        "faces": (0..mesh.n_faces()).map(|face| {
            let cross = extraction.crosses[face].as_ref();
            json!({
                "frame": raw[face].coeffs.iter().cloned().collect::<Vec<f64>>(),
                "projected": outcome.field[face].coeffs.iter().cloned().collect::<Vec<f64>>(),
                "theta": cross.map(|c| c.theta),
                "scale": cross.map(|c| c.scale),
                "dirs": cross.map(|c| [
                    [c.dirs[0].x, c.dirs[0].y, c.dirs[0].z],
                    [c.dirs[1].x, c.dirs[1].y, c.dirs[1].z],
                ]),
                "degenerate": cross.is_none(),
            })
        }).collect::<Vec<_>>(),
    });
    write_json(&manifest.out_dir.join("field.json"), &field_json)?;
    write_json(&manifest.out_dir.join("report.json"), report)?;

    let singularities = singularity_indices(&mesh, &extraction.crosses);
    write_json(&manifest.out_dir.join("singularities.json"), &singularities)?;

    let alignment = crease_alignment_score(&mesh, &extraction.crosses, std::f64::consts::PI / 6.0);
    write_json(&manifest.out_dir.join("crease_alignment.json"), &alignment)?;

    std::fs::write(
        manifest.out_dir.join("crosses.ply"),
        crosses_to_ply(&mesh, &extraction.crosses),
    )?;
    std::fs::write(manifest.out_dir.join("mesh_stats.json"), to_json_string(&mesh.stats()))?;

    if let Some(trace) = &report.trace {
        let mut csv = String::from("iteration,primal_residual,dual_residual,objective\n");
        for row in trace {
            let _ = writeln!(
                csv,
                "{},{:.16e},{:.16e},{:.16e}",
                row.iteration, row.primal_residual, row.dual_residual, row.objective
            );
        }
        std::fs::write(manifest.out_dir.join("trace.csv"), csv)?;
    }

    Ok(SolveArtifacts {
        out_dir: manifest.out_dir.clone(),
        converged: report.converged,
        objective: report.objective,
    })
}

/// Runs the closed-form identity suite, printing one line per identity.
pub fn run_verify(grid: usize, seed: u64) -> (bool, Vec<IdentityReport>) {
    let reports = run_default_suite(&SuiteConfig {
        grid,
        random_samples: 1000,
        seed,
    });
    let mut all_pass = true;
    for r in &reports {
        println!(
            "{} {:<28} max residual {:.3e} (tol {:.1e})",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.max_residual,
            r.tolerance
        );
        all_pass &= r.pass;
    }
    (all_pass, reports)
}

/// One bench row: assemble and solve timings for a mesh.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub mesh: String,
    pub n_faces: usize,
    pub assemble_s: f64,
    pub solve_s: f64,
    pub p: String,
    pub epsilon: f64,
    pub objective: f64,
    pub iterations: usize,
}

/// Times assemble and solve for each mesh spec; returns CSV text.
pub fn run_bench(
    sources: &[MeshSource],
    config: &SolveConfig,
) -> Result<(String, Vec<BenchRow>), CliError> {
    let mut rows = Vec::new();
    for source in sources {
        let mesh = load_mesh(source)?;
        let label = match source {
            MeshSource::Path(p) => p.display().to_string(),
            MeshSource::Canonical(s) => s.clone(),
        };
        let t0 = std::time::Instant::now();
        let problem = assemble(&mesh, config.p, config.epsilon, &config.prescribed)
            .map_err(crate::solver::SolveError::Assembly)?;
        let assemble_s = t0.elapsed().as_secs_f64();
        let t1 = std::time::Instant::now();
        let (_, report) = crate::solver::solve(&problem, config)?;
        let solve_s = t1.elapsed().as_secs_f64();
        rows.push(BenchRow {
            mesh: label,
            n_faces: mesh.n_faces(),
            assemble_s,
            solve_s,
            p: config.p.to_string(),
            epsilon: config.epsilon,
            objective: report.objective,
            iterations: report.iterations,
        });
    }
    let mut csv = String::from("mesh,n_faces,assemble_s,solve_s,p,epsilon,objective,iterations\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{:.16e},{:.16e},{},{:.16e},{:.16e},{}",
            r.mesh, r.n_faces, r.assemble_s, r.solve_s, r.p, r.epsilon, r.objective, r.iterations
        );
    }
    Ok((csv, rows))
}

/// Writes the per-epsilon deviation curve as JSON.
pub fn run_deviation(
    eps_grid: &[f64],
    samples: usize,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    let points = normal_deviation_experiment(eps_grid, samples, seed);
    write_json(out, &points)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_spec_parsing() {
        assert_eq!(parse_canonical("cube").unwrap(), CanonicalMesh::Cube { n: 1 });
        assert_eq!(parse_canonical("cube:4").unwrap(), CanonicalMesh::Cube { n: 4 });
        match parse_canonical("wedge:2.356").unwrap() {
            CanonicalMesh::Wedge { dihedral, n } => {
                assert!((dihedral - 2.356).abs() < 1e-12);
                assert_eq!(n, 10);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_canonical("dodecahedron").is_err());
        assert!(parse_canonical("cube:x").is_err());
    }

    #[test]
    fn full_precision_floats() {
        let v = json!({ "x": 0.1f64, "y": 1.0f64 / 3.0 });
        let s = to_json_string(&v);
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("3.3333333333333331e-1"), "{s}");
        // round-trips exactly
        let parsed: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(parsed["x"].as_f64().unwrap(), 0.1);
    }

    #[test]
    fn constraint_direction_resolves_to_aligned_frame() {
        let mesh = make_canonical_mesh(&CanonicalMesh::FlatGrid { n: 2 }).unwrap();
        let entries = vec![ConstraintEntry {
            face: 0,
            frame: None,
            direction: Some([1.0, 1.0, 0.0]),
        }];
        let resolved = resolve_constraints(&mesh, &entries).unwrap();
        let cross = variety::extract_cross(&resolved[0].1, &mesh.face_normals[0]).unwrap();
        let d = Vector3::new(1.0, 1.0, 0.0).normalize();
        let best = cross.dirs[0].dot(&d).abs().max(cross.dirs[1].dot(&d).abs());
        assert!(best > 1.0 - 1e-9);
        // purely normal direction is rejected
        let bad = vec![ConstraintEntry {
            face: 0,
            frame: None,
            direction: Some([0.0, 0.0, 1.0]),
        }];
        assert!(resolve_constraints(&mesh, &bad).is_err());
    }
}
