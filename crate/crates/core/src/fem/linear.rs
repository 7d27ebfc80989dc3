//! Sparse symmetric positive-definite solves (lower triangle, CSC).

use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMat};
use faer::{Conj, MatMut, Side};

use crate::error::{Error, Result};

/// Lower-triangular CSC structure.
#[derive(Debug, Clone)]
pub struct SparsePattern {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
}

impl SparsePattern {
    /// `pairs` are (column, row) with row ≥ column; duplicates allowed.
    pub fn from_lower_pairs(n: usize, mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        if pairs.iter().any(|&(c, r)| r < c || r >= n) {
            return Err(Error::Linear(
                "pattern entry outside the lower triangle".into(),
            ));
        }
        pairs.sort_unstable();
        pairs.dedup();
        let mut col_ptr = vec![0usize; n + 1];
        for &(c, _) in &pairs {
            col_ptr[c + 1] += 1;
        }
        for c in 0..n {
            col_ptr[c + 1] += col_ptr[c];
        }
        let row_idx = pairs.into_iter().map(|p| p.1).collect();
        Ok(Self {
            n,
            col_ptr,
            row_idx,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    pub fn position(&self, row: usize, col: usize) -> Option<usize> {
        let (a, b) = (self.col_ptr[col], self.col_ptr[col + 1]);
        self.row_idx[a..b].binary_search(&row).ok().map(|k| a + k)
    }

    /// y = A x for the symmetric matrix stored by its lower triangle.
    pub fn sym_mul(&self, values: &[f64], x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for c in 0..self.n {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                let r = self.row_idx[k];
                y[r] += values[k] * x[c];
                if r != c {
                    y[c] += values[k] * x[r];
                }
            }
        }
    }
}

/// Cholesky factorisation with a cached symbolic analysis.
pub struct SpdSolver {
    symbolic: SymbolicSparseColMat<usize>,
    analysis: Option<SymbolicLlt<usize>>,
    factor: Option<Llt<usize, f64>>,
}

impl std::fmt::Debug for SpdSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "SpdSolver(n={}, factored={})",
            self.symbolic.nrows(),
            self.factor.is_some()
        )
    }
}

impl SpdSolver {
    pub fn new(pattern: &SparsePattern) -> Self {
        let symbolic = SymbolicSparseColMat::new_checked(
            pattern.n,
            pattern.n,
            pattern.col_ptr.clone(),
            None,
            pattern.row_idx.clone(),
        );
        Self {
            symbolic,
            analysis: None,
            factor: None,
        }
    }

    pub fn factorize(&mut self, values: &[f64], block: &str) -> Result<()> {
        if self.symbolic.nrows() == 0 {
            return Ok(());
        }
        if self.analysis.is_none() {
            let a = SymbolicLlt::try_new(self.symbolic.as_ref(), Side::Lower)
                .map_err(|e| Error::Linear(format!("{block} symbolic analysis failed: {e:?}")))?;
            self.analysis = Some(a);
        }
        let mat = SparseColMatRef::new(self.symbolic.as_ref(), values);
        let llt = Llt::try_new_with_symbolic(self.analysis.clone().unwrap(), mat, Side::Lower)
            .map_err(|e| {
                Error::Linear(format!("{block} tangent is not positive definite: {e:?}"))
            })?;
        self.factor = Some(llt);
        Ok(())
    }

    pub fn solve_in_place(&self, rhs: &mut [f64]) -> Result<()> {
        if rhs.is_empty() {
            return Ok(());
        }
        let llt = self
            .factor
            .as_ref()
            .ok_or_else(|| Error::Linear("solve before factorisation".into()))?;
        let n = rhs.len();
        llt.solve_in_place_with_conj(Conj::No, MatMut::from_column_major_slice_mut(rhs, n, 1));
        Ok(())
    }
}
