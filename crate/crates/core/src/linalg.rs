//! Small sparse helpers on top of `nalgebra-sparse`.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::ops::serial::spsolve_csc_lower_triangular;
use nalgebra_sparse::ops::Op;
use nalgebra_sparse::CscMatrix;

use crate::error::{Error, Result};

/// `xᵀ M x` for a square sparse matrix.
pub fn quad_form(m: &CscMatrix<f64>, x: &[f64]) -> f64 {
    m.triplet_iter().map(|(i, j, &v)| x[i] * v * x[j]).sum()
}

pub fn mat_vec(m: &CscMatrix<f64>, x: &[f64]) -> DVector<f64> {
    let mut out = DVector::zeros(m.nrows());
    for (i, j, &v) in m.triplet_iter() {
        out[i] += v * x[j];
    }
    out
}

/// Sparse Cholesky `Q = L Lᵀ` with the operations the samplers need.
#[derive(Clone)]
pub struct SparseCholesky {
    inner: CscCholesky<f64>,
    pattern_nnz: usize,
    pattern: nalgebra_sparse::pattern::SparsityPattern,
}

impl SparseCholesky {
    pub fn factor(m: &CscMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let inner = CscCholesky::factor(m).map_err(|e| Error::Factorization(format!("{e:?}")))?;
        Ok(Self {
            inner,
            pattern_nnz: m.nnz(),
            pattern: m.pattern().clone(),
        })
    }

    /// Refactors in place when `m` shares the stored sparsity pattern,
    /// otherwise starts over.
    pub fn refactor(&mut self, m: &CscMatrix<f64>) -> Result<()> {
        if m.nnz() == self.pattern_nnz && m.pattern() == &self.pattern {
            self.inner
                .refactor(m.values())
                .map_err(|e| Error::Factorization(format!("{e:?}")))
        } else {
            *self = Self::factor(m)?;
            Ok(())
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.l().nrows()
    }

    pub fn l(&self) -> &CscMatrix<f64> {
        self.inner.l()
    }

    pub fn logdet(&self) -> f64 {
        let l = self.inner.l();
        (0..l.nrows())
            .map(|j| {
                let d = l.get_entry(j, j).map(|e| e.into_value()).unwrap_or(0.0);
                2.0 * d.ln()
            })
            .sum()
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let x = self.inner.solve(b);
        x.column(0).into_owned()
    }

    pub fn solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.inner.solve(b)
    }

    /// Solves `Lᵀ x = z`; with `z` standard normal, `x` has covariance `Q⁻¹`.
    pub fn solve_lt(&self, z: &DVector<f64>) -> DVector<f64> {
        let mut x = DMatrix::from_column_slice(z.len(), 1, z.as_slice());
        spsolve_csc_lower_triangular(Op::Transpose(self.inner.l()), &mut x)
            .expect("Cholesky factor has a nonzero diagonal");
        x.column(0).into_owned()
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.inner.solve(&DMatrix::identity(self.dim(), self.dim()))
    }
}
