//! Convex solves of the assembled problem and the degeneracy re-solve loop.
//!
//! Two backends share one report type: the direct KKT factorization for
//! `p = 2, epsilon = 0` (which doubles as an oracle for the general path)
//! and the operator-splitting conic solver for every other exponent and the
//! soft alignment cones.

mod cones;
mod conic;
mod direct;
mod sparse;

pub use conic::ConicOptions;
pub use direct::solve_direct_p2 as solve_direct_p2_with_tol;

use crate::energy::{assemble, FrameField, PNorm, Problem};
use crate::mesh::SurfaceMesh;
use crate::sh::ShFrame;
use crate::variety;
use nalgebra::Rotation3;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("{0}")]
    WrongPath(String),
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
    #[error("KKT residual {residual:.3e} exceeds tolerance {tolerance:.3e}; the system may be singular (e.g. a flat unprescribed mesh) -- prescribe a frame or use epsilon > 0")]
    KktResidual { residual: f64, tolerance: f64 },
    #[error("assembly error: {0}")]
    Assembly(#[from] crate::energy::AssembleError),
}

/// Solver parameters. Tolerances are relative; the conic path checks primal
/// and dual residuals against them, the direct path drives the KKT residual
/// below `min(tol_dual, 1e-8) * (1 + ||rhs||)`.
#[derive(Debug, Clone, Serialize)]
pub struct SolveConfig {
    pub p: PNorm,
    pub epsilon: f64,
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub max_iter: usize,
    pub degeneracy_threshold: f64,
    pub resolve_rounds: usize,
    pub seed: u64,
    #[serde(skip)]
    pub prescribed: Vec<(usize, ShFrame)>,
    pub collect_trace: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            p: PNorm::Finite(2.0),
            epsilon: 0.0,
            tol_primal: 1e-6,
            tol_dual: 1e-6,
            max_iter: 20_000,
            degeneracy_threshold: 0.665,
            resolve_rounds: 1,
            seed: 0,
            prescribed: Vec::new(),
            collect_trace: false,
        }
    }
}

/// One row of the optional convergence trace.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub objective: f64,
    pub converged: bool,
    /// Per-face distance to the variety, filled by the degeneracy loop.
    pub degeneracy_distances: Vec<f64>,
    /// Faces left free (re-solved) by the degeneracy loop.
    pub resolved_faces: usize,
    pub non_degenerate_fraction: f64,
    /// Faces still past the threshold after the final round; projected anyway.
    pub still_degenerate: Vec<usize>,
    pub wall_time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRow>>,
}

/// Direct `p = 2, epsilon = 0` KKT solve with the default residual target.
pub fn solve_direct_p2(problem: &Problem) -> Result<(FrameField, SolveReport), SolveError> {
    direct::solve_direct_p2(problem, 1e-8)
}

/// Conic solve with explicit options.
pub fn solve_conic(
    problem: &Problem,
    config: &SolveConfig,
) -> Result<(FrameField, SolveReport), SolveError> {
    conic::solve_conic(
        problem,
        &ConicOptions {
            tol_primal: config.tol_primal,
            tol_dual: config.tol_dual.max(1e-10),
            max_iter: config.max_iter,
            collect_trace: config.collect_trace,
        },
    )
}

/// Dispatches to the direct path for `p = 2, epsilon = 0` and the conic
/// path otherwise.
pub fn solve(
    problem: &Problem,
    config: &SolveConfig,
) -> Result<(FrameField, SolveReport), SolveError> {
    let is_p2 = matches!(problem.p, PNorm::Finite(p) if p == 2.0);
    if is_p2 && problem.epsilon == 0.0 {
        direct::solve_direct_p2(problem, config.tol_dual.min(1e-8))
    } else {
        solve_conic(problem, config)
    }
}

/// Result of the degeneracy loop: the final on-variety field, the raw solver
/// field it was projected from, and the combined report.
#[derive(Debug, Clone)]
pub struct DegeneracyOutcome {
    /// Per-face projection onto the variety (unit frames).
    pub field: FrameField,
    /// Raw solver output (anisotropic scales preserved).
    pub raw_field: FrameField,
    pub report: SolveReport,
}

/// Per-face distance to the variety, cheap path first: a projection seeded
/// from the face's alignment rotation is a valid upper bound, so it can
/// clear a face without the multi-start search.
fn face_degeneracy(problem: &Problem, field: &FrameField, threshold: f64) -> Vec<f64> {
    (0..problem.n_faces)
        .map(|face| {
            let hint = Rotation3::from_scaled_axis(problem.alignments[face].axis_angle);
            let quick = variety::project_with_hint(&field[face], hint.matrix());
            if quick.distance <= 0.5 * threshold {
                quick.distance
            } else {
                variety::project_to_variety(&field[face]).distance
            }
        })
        .collect()
}

fn project_field(problem: &Problem, field: &FrameField) -> FrameField {
    FrameField {
        frames: (0..problem.n_faces)
            .map(|face| {
                let hint = Rotation3::from_scaled_axis(problem.alignments[face].axis_angle);
                let quick = variety::project_with_hint(&field[face], hint.matrix());
                let full = if quick.distance <= 1e-6 {
                    quick
                } else {
                    let multi = variety::project_to_variety(&field[face]);
                    if multi.distance < quick.distance {
                        multi
                    } else {
                        quick
                    }
                };
                full.frame
            })
            .collect(),
    }
}

/// Solves, projects every frame onto the variety, and re-solves with
/// non-degenerate frames pinned to their projections while degenerate ones
/// stay free. Frames still degenerate after the final round are projected
/// anyway and flagged in the report.
pub fn solve_with_degeneracy_loop(
    mesh: &SurfaceMesh,
    config: &SolveConfig,
) -> Result<DegeneracyOutcome, SolveError> {
    let problem = assemble(mesh, config.p, config.epsilon, &config.prescribed)?;
    let (mut raw_field, mut report) = solve(&problem, config)?;
    let mut distances = face_degeneracy(&problem, &raw_field, config.degeneracy_threshold);
    let mut resolved_total = 0usize;

    for _ in 0..config.resolve_rounds {
        let degenerate: Vec<usize> = (0..problem.n_faces)
            .filter(|&f| distances[f] > config.degeneracy_threshold)
            .collect();
        if degenerate.is_empty() {
            break;
        }
        resolved_total = degenerate.len();
        // pin everything non-degenerate to its projection; degenerate faces
        // stay free
        let projected = project_field(&problem, &raw_field);
        let mut pins: Vec<(usize, ShFrame)> = Vec::new();
        for face in 0..problem.n_faces {
            if distances[face] <= config.degeneracy_threshold {
                pins.push((face, projected[face]));
            }
        }
        let pinned_problem = assemble(mesh, config.p, config.epsilon, &pins)?;
        let (next_field, next_report) = solve(&pinned_problem, config)?;
        raw_field = next_field;
        report.iterations += next_report.iterations;
        report.objective = next_report.objective;
        report.primal_residual = next_report.primal_residual;
        report.dual_residual = next_report.dual_residual;
        report.converged = next_report.converged;
        report.wall_time_s += next_report.wall_time_s;
        distances = face_degeneracy(&problem, &raw_field, config.degeneracy_threshold);
    }

    let still_degenerate: Vec<usize> = (0..problem.n_faces)
        .filter(|&f| distances[f] > config.degeneracy_threshold)
        .collect();
    let field = project_field(&problem, &raw_field);
    report.non_degenerate_fraction =
        (problem.n_faces - still_degenerate.len()) as f64 / problem.n_faces as f64;
    report.degeneracy_distances = distances;
    report.resolved_faces = resolved_total;
    report.still_degenerate = still_degenerate;
    Ok(DegeneracyOutcome {
        field,
        raw_field,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_canonical_mesh, CanonicalMesh};
    use crate::variety::aligned_frame;

    #[test]
    fn cube_loop_is_projection_only() {
        let mesh = make_canonical_mesh(&CanonicalMesh::Cube { n: 1 }).unwrap();
        let config = SolveConfig::default();
        let out = solve_with_degeneracy_loop(&mesh, &config).unwrap();
        assert_eq!(out.report.resolved_faces, 0);
        assert!((out.report.non_degenerate_fraction - 1.0).abs() < 1e-12);
        // projected output is on the variety
        for f in &out.field.frames {
            assert!((f.norm() - 1.0).abs() < 1e-9);
        }
        // and matches the projected initial solve
        let problem = assemble(&mesh, config.p, config.epsilon, &[]).unwrap();
        let (raw, _) = solve(&problem, &config).unwrap();
        for (a, b) in out.raw_field.frames.iter().zip(&raw.frames) {
            assert!((a.coeffs - b.coeffs).norm() < 1e-12);
        }
    }

    #[test]
    fn noisy_cube_loop_reaches_high_nondegenerate_fraction() {
        let mesh =
            make_canonical_mesh(&CanonicalMesh::NoisyCube { sigma: 0.08, seed: 42, n: 4 }).unwrap();
        let config = SolveConfig::default();
        let out = solve_with_degeneracy_loop(&mesh, &config).unwrap();
        assert!(
            out.report.non_degenerate_fraction >= 0.99,
            "fraction {}",
            out.report.non_degenerate_fraction
        );
    }

    #[test]
    fn all_prescribed_passes_through() {
        let mesh = make_canonical_mesh(&CanonicalMesh::Cube { n: 1 }).unwrap();
        let prescribed: Vec<_> = (0..mesh.n_faces())
            .map(|f| (f, aligned_frame(&mesh.face_normals[f], 0.0, 1.0)))
            .collect();
        let config = SolveConfig {
            prescribed: prescribed.clone(),
            ..SolveConfig::default()
        };
        let out = solve_with_degeneracy_loop(&mesh, &config).unwrap();
        for (face, frame) in &prescribed {
            assert!((out.field[*face].coeffs - frame.coeffs).norm() < 1e-7);
            assert!((out.raw_field[*face].coeffs - frame.coeffs).norm() < 1e-12);
        }
    }
}
