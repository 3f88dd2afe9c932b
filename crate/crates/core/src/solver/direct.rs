//! Direct path for `p = 2, epsilon = 0`.
//!
//! The equality-constrained quadratic `min sum_e w_e ||f_t1 - f_t2||^2`
//! subject to `W f = u` has the sparse symmetric KKT system
//! `[2 L_w, W^T; W, 0]` with `L_w` the 9-channel weighted dual Laplacian.
//! Prescribed frames are eliminated before assembly. The system is factored
//! as a quasi-definite LDL^T (signs +1 on primal rows, -1 on dual rows,
//! dynamic regularization) and polished by iterative refinement until the
//! true KKT residual meets the tolerance.

use super::sparse::{SymmetricFactor, SymmetricTriplets};
use super::{SolveError, SolveReport};
use crate::energy::{evaluate_energy, FrameField, PNorm, Problem};
use crate::sh::{Coeffs, ShFrame};
use std::time::Instant;

/// Rows per face in the KKT layout: 9 primal + 7 dual.
const FACE_STRIDE: usize = 16;

pub fn solve_direct_p2(
    problem: &Problem,
    kkt_tol: f64,
) -> Result<(FrameField, SolveReport), SolveError> {
    match problem.p {
        PNorm::Finite(p) if p == 2.0 => {}
        _ => return Err(SolveError::WrongPath("direct path requires p = 2".into())),
    }
    if problem.epsilon != 0.0 {
        return Err(SolveError::WrongPath("direct path requires epsilon = 0".into()));
    }
    let start = Instant::now();

    // eliminate prescribed faces
    let mut slot = vec![usize::MAX; problem.n_faces];
    let mut free = Vec::new();
    for face in 0..problem.n_faces {
        if !problem.prescribed.contains_key(&face) {
            slot[face] = free.len();
            free.push(face);
        }
    }
    let n_free = free.len();
    if n_free == 0 {
        let field = problem.aligned_start();
        let report = SolveReport {
            objective: evaluate_energy(problem, &field),
            converged: true,
            wall_time_s: start.elapsed().as_secs_f64(),
            ..SolveReport::default()
        };
        return Ok((field, report));
    }

    let dim = FACE_STRIDE * n_free;
    let primal = |s: usize, c: usize| FACE_STRIDE * s + c;
    let dual = |s: usize, r: usize| FACE_STRIDE * s + 9 + r;

    let mut trip = SymmetricTriplets::new(dim);
    let mut rhs = vec![0.0f64; dim];

    // Laplacian diagonal accumulators per free face
    let mut diag = vec![0.0f64; n_free];
    for e in &problem.edges {
        let [a, b] = e.faces;
        let w = e.weight;
        match (slot[a], slot[b]) {
            (sa, sb) if sa != usize::MAX && sb != usize::MAX => {
                diag[sa] += w;
                diag[sb] += w;
                let (hi, lo) = if sa > sb { (sa, sb) } else { (sb, sa) };
                for c in 0..9 {
                    trip.push(primal(hi, c), primal(lo, c), -2.0 * w);
                }
            }
            (sa, _) if sa != usize::MAX => {
                diag[sa] += w;
                let fb = problem.prescribed[&b].coeffs;
                for c in 0..9 {
                    rhs[primal(sa, c)] += 2.0 * w * fb[c];
                }
            }
            (_, sb) if sb != usize::MAX => {
                diag[sb] += w;
                let fa = problem.prescribed[&a].coeffs;
                for c in 0..9 {
                    rhs[primal(sb, c)] += 2.0 * w * fa[c];
                }
            }
            _ => {} // both prescribed: constant term
        }
    }
    let mut signs = vec![0i8; dim];
    for (s, &face) in free.iter().enumerate() {
        for c in 0..9 {
            trip.push(primal(s, c), primal(s, c), 2.0 * diag[s]);
            signs[primal(s, c)] = 1;
        }
        let op = &problem.alignments[face];
        for r in 0..7 {
            trip.push(dual(s, r), dual(s, r), 0.0);
            signs[dual(s, r)] = -1;
            for c in 0..9 {
                let v = op.w[(r, c)];
                if v != 0.0 {
                    trip.push(dual(s, r), primal(s, c), v);
                }
            }
            rhs[dual(s, r)] = op.u0[r];
        }
    }

    let scale = diag.iter().fold(1.0f64, |a, &b| a.max(2.0 * b));
    let factor = SymmetricFactor::new(&trip, Some(&signs), 1e-13 * scale)
        .map_err(|e| SolveError::Factorization(format!("{e}; consider epsilon > 0")))?;
    let (solution, residual) = factor.solve_refined(&rhs, kkt_tol, 20);
    let rhs_norm = rhs.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if !residual.is_finite() || residual > kkt_tol * (1.0 + rhs_norm) {
        return Err(SolveError::KktResidual {
            residual,
            tolerance: kkt_tol * (1.0 + rhs_norm),
        });
    }

    let mut field = problem.aligned_start();
    for (s, &face) in free.iter().enumerate() {
        let mut c = Coeffs::zeros();
        for k in 0..9 {
            c[k] = solution[primal(s, k)];
        }
        field[face] = ShFrame::new(c);
    }
    let report = SolveReport {
        iterations: 1,
        primal_residual: residual,
        dual_residual: residual,
        objective: evaluate_energy(problem, &field),
        converged: true,
        wall_time_s: start.elapsed().as_secs_f64(),
        ..SolveReport::default()
    };
    Ok((field, report))
}
