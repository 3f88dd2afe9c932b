//! Thin wrapper over faer's sparse symmetric factorizations.
//!
//! Two regimes share one interface: positive-definite systems (the
//! operator-splitting inner solve) and quasi-definite KKT systems, factored
//! as LDL^T with per-row expected signs and dynamic regularization, then
//! polished by iterative refinement against the unregularized matrix.

use faer::dyn_stack::{MemBuffer, MemStack, StackReq};
use faer::linalg::cholesky::ldlt::factor::LdltRegularization;
use faer::reborrow::*;
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, CholeskySymbolicParams, SymbolicCholesky, SymmetricOrdering,
};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Par, Side, Spec};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FactorError {
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
    #[error("matrix construction failed: {0}")]
    Construction(String),
}

/// Lower-triangle symmetric matrix in triplet form.
pub struct SymmetricTriplets {
    pub n: usize,
    entries: Vec<Triplet<usize, usize, f64>>,
}

impl SymmetricTriplets {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    /// Adds `value` at `(row, col)`; only the lower triangle (`row >= col`)
    /// is stored, so symmetric contributions are pushed once.
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row >= col, "lower triangle only: ({row}, {col})");
        self.entries.push(Triplet::new(row, col, value));
    }

    fn build(&self) -> Result<SparseColMat<usize, f64>, FactorError> {
        SparseColMat::try_new_from_triplets(self.n, self.n, &self.entries)
            .map_err(|e| FactorError::Construction(format!("{e:?}")))
    }
}

/// Factored symmetric matrix supporting repeated multi-column solves and
/// symmetric matvecs with the original (unregularized) values.
pub struct SymmetricFactor {
    symbolic: SymbolicCholesky<usize>,
    l_values: Vec<f64>,
    lower: SparseColMat<usize, f64>,
    n: usize,
}

impl SymmetricFactor {
    /// Factors the matrix as LDL^T. `signs`, when given, are the expected
    /// pivot signs of a quasi-definite ordering (+1 primal rows, -1 dual
    /// rows); wrong-signed or tiny pivots are bumped to `delta`, and the
    /// caller is expected to run refinement afterwards.
    pub fn new(
        triplets: &SymmetricTriplets,
        signs: Option<&[i8]>,
        delta: f64,
    ) -> Result<Self, FactorError> {
        let lower = triplets.build()?;
        let symbolic = factorize_symbolic_cholesky(
            lower.symbolic(),
            Side::Lower,
            SymmetricOrdering::Amd,
            CholeskySymbolicParams::default(),
        )
        .map_err(|e| FactorError::Factorization(format!("symbolic: {e:?}")))?;
        let mut l_values = vec![0.0f64; symbolic.len_val()];
        let mut mem = MemBuffer::new(StackReq::any_of(&[
            symbolic.factorize_numeric_ldlt_scratch::<f64>(Par::Seq, Spec::default()),
            symbolic.solve_in_place_scratch::<f64>(16, Par::Seq),
        ]));
        let stack = MemStack::new(&mut mem);
        let reg = LdltRegularization {
            dynamic_regularization_signs: signs,
            dynamic_regularization_delta: delta,
            dynamic_regularization_epsilon: delta,
        };
        symbolic
            .factorize_numeric_ldlt(
                &mut l_values,
                lower.rb(),
                Side::Lower,
                reg,
                Par::Seq,
                stack,
                Spec::default(),
            )
            .map_err(|e| FactorError::Factorization(format!("{e:?}")))?;
        Ok(Self {
            symbolic,
            l_values,
            lower,
            n: triplets.n,
        })
    }

    /// Solves in place for `ncols` column-major right-hand sides.
    pub fn solve_in_place(&self, rhs: &mut [f64], ncols: usize) {
        assert_eq!(rhs.len(), self.n * ncols);
        let ldlt = faer::sparse::linalg::cholesky::LdltRef::new(&self.symbolic, &self.l_values);
        let mut mem = MemBuffer::new(self.symbolic.solve_in_place_scratch::<f64>(ncols, Par::Seq));
        let stack = MemStack::new(&mut mem);
        let mut mat = faer::MatMut::from_column_major_slice_mut(rhs, self.n, ncols);
        ldlt.solve_in_place_with_conj(faer::Conj::No, mat.rb_mut(), Par::Seq, stack);
    }

    /// Symmetric matvec `y = A x` with the original values.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.fill(0.0);
        let m = self.lower.rb();
        let col_ptr = m.col_ptr();
        let row_idx = m.row_idx();
        let val = m.val();
        for col in 0..self.n {
            let xj = x[col];
            for k in col_ptr[col]..col_ptr[col + 1] {
                let row = row_idx[k];
                let v = val[k];
                y[row] += v * xj;
                if row != col {
                    y[col] += v * x[row];
                }
            }
        }
    }

    /// Solves `A x = rhs` with iterative refinement until
    /// `||rhs - A x||_inf <= tol * (1 + ||rhs||_inf)` or the residual stops
    /// improving. Returns the solution and the final residual norm.
    pub fn solve_refined(&self, rhs: &[f64], tol: f64, max_rounds: usize) -> (Vec<f64>, f64) {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x, 1);
        let rhs_norm = rhs.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let target = tol * (1.0 + rhs_norm);
        let mut residual = vec![0.0f64; self.n];
        let mut best = f64::INFINITY;
        for _ in 0..max_rounds {
            self.matvec(&x, &mut residual);
            for i in 0..self.n {
                residual[i] = rhs[i] - residual[i];
            }
            let rnorm = residual.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            if rnorm <= target || rnorm >= 0.5 * best {
                return (x, rnorm);
            }
            best = rnorm;
            let mut delta = residual.clone();
            self.solve_in_place(&mut delta, 1);
            for i in 0..self.n {
                x[i] += delta[i];
            }
        }
        self.matvec(&x, &mut residual);
        for i in 0..self.n {
            residual[i] = rhs[i] - residual[i];
        }
        let rnorm = residual.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        (x, rnorm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spd_solve() {
        let mut t = SymmetricTriplets::new(2);
        t.push(0, 0, 4.0);
        t.push(1, 1, 3.0);
        t.push(1, 0, 1.0);
        let f = SymmetricFactor::new(&t, None, 0.0).unwrap();
        let (x, res) = f.solve_refined(&[5.0, 4.0], 1e-12, 4);
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 1.0).abs() < 1e-12);
        assert!(res < 1e-12);
    }

    #[test]
    fn quasi_definite_kkt_solve() {
        // min ||x||^2 / 2 s.t. x0 + x1 = 1 -> KKT [I, a; a^T, 0]
        let mut t = SymmetricTriplets::new(3);
        t.push(0, 0, 1.0);
        t.push(1, 1, 1.0);
        t.push(2, 2, 0.0);
        t.push(2, 0, 1.0);
        t.push(2, 1, 1.0);
        let f = SymmetricFactor::new(&t, Some(&[1, 1, -1]), 1e-13).unwrap();
        let (x, res) = f.solve_refined(&[0.0, 0.0, 1.0], 1e-10, 6);
        assert!((x[0] - 0.5).abs() < 1e-10, "{x:?}");
        assert!((x[1] - 0.5).abs() < 1e-10);
        assert!(res < 1e-10);
    }

    #[test]
    fn multi_column_solve() {
        let mut t = SymmetricTriplets::new(2);
        t.push(0, 0, 2.0);
        t.push(1, 1, 2.0);
        let f = SymmetricFactor::new(&t, None, 0.0).unwrap();
        let mut rhs = vec![2.0, 4.0, 6.0, 8.0]; // two columns
        f.solve_in_place(&mut rhs, 2);
        assert_eq!(rhs, vec![1.0, 2.0, 3.0, 4.0]);
    }
}
