//! Sparse symmetric storage and the two linear solvers used by the
//! fixed-point loop: sparse Cholesky (faer) and Jacobi-preconditioned CG.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMat};
use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Compressed sparse row matrix with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub(crate) nrows: usize,
    pub(crate) row_ptr: Vec<usize>,
    pub(crate) col_idx: Vec<usize>,
    pub(crate) values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a zero matrix with the given sorted, duplicate-free row patterns.
    pub fn from_pattern(rows: &[Vec<usize>]) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for r in rows {
            debug_assert!(r.windows(2).all(|w| w[0] < w[1]));
            col_idx.extend_from_slice(r);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        Self {
            nrows: rows.len(),
            row_ptr,
            col_idx,
            values: vec![0.0; nnz],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    /// Storage slot of entry `(i, j)`, if it is in the pattern.
    pub fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (cols, _) = self.row(i);
        cols.binary_search(&j).ok().map(|k| self.row_ptr[i] + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.get(i, i)).collect()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.nrows).all(|i| {
            let (cols, vals) = self.row(i);
            cols.iter()
                .zip(vals)
                .all(|(&j, &v)| (v - self.get(j, i)).abs() <= tol * v.abs().max(1.0))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearSolverKind {
    /// Sparse Cholesky; the symbolic analysis is reused across iterations.
    Direct,
    /// Conjugate gradient with diagonal preconditioning.
    ConjugateGradient,
}

impl std::str::FromStr for LinearSolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(LinearSolverKind::Direct),
            "cg" => Ok(LinearSolverKind::ConjugateGradient),
            other => Err(Error::Config(format!("unknown linear solver `{other}` (expected direct|cg)"))),
        }
    }
}

/// Solves a sequence of SPD systems sharing one sparsity pattern.
pub struct SpdSolver {
    kind: LinearSolverKind,
    cg_tolerance: f64,
    cg_max_iterations: usize,
    symbolic: Option<(SymbolicSparseColMat<usize>, SymbolicLlt<usize>)>,
}

impl SpdSolver {
    pub fn new(kind: LinearSolverKind, cg_tolerance: f64) -> Self {
        Self {
            kind,
            cg_tolerance,
            cg_max_iterations: 100_000,
            symbolic: None,
        }
    }

    /// Solves `a x = b`; `x` holds the initial guess on entry (used by CG).
    pub fn solve(&mut self, a: &CsrMatrix, b: &[f64], x: &mut [f64]) -> Result<()> {
        if a.nrows == 0 {
            return Ok(());
        }
        match self.kind {
            LinearSolverKind::Direct => self.cholesky(a, b, x),
            LinearSolverKind::ConjugateGradient => {
                pcg(a, b, x, self.cg_tolerance, self.cg_max_iterations).map(|_| ())
            }
        }
    }

    fn cholesky(&mut self, a: &CsrMatrix, b: &[f64], x: &mut [f64]) -> Result<()> {
        let n = a.nrows;
        if self.symbolic.is_none() {
            // a symmetric CSR matrix is its own CSC transpose
            let pattern = SymbolicSparseColMat::new_checked(n, n, a.row_ptr.clone(), None, a.col_idx.clone());
            let llt = SymbolicLlt::try_new(pattern.as_ref(), Side::Lower)
                .map_err(|e| Error::LinearSolver(format!("symbolic factorization: {e:?}")))?;
            self.symbolic = Some((pattern, llt));
        }
        let (pattern, symbolic) = self.symbolic.as_ref().unwrap();
        if pattern.row_idx().len() != a.values.len() {
            return Err(Error::LinearSolver("sparsity pattern changed between solves".into()));
        }
        let mat = SparseColMatRef::new(pattern.as_ref(), &a.values);
        let llt = Llt::try_new_with_symbolic(symbolic.clone(), mat, Side::Lower)
            .map_err(|e| Error::LinearSolver(format!("Cholesky factorization failed ({e:?}); matrix is not SPD")))?;
        let rhs = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
        let sol = llt.solve(&rhs);
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = sol[(i, 0)];
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearSolver("non-finite Cholesky solution".into()));
        }
        Ok(())
    }
}

/// Jacobi-preconditioned conjugate gradient. Stops when the residual norm
/// drops below `tol * |b|`. Returns the iteration count.
pub fn pcg(a: &CsrMatrix, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> Result<usize> {
    let n = a.nrows;
    let dinv: Vec<f64> = a
        .diagonal()
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            if d > 0.0 {
                Ok(1.0 / d)
            } else {
                Err(Error::LinearSolver(format!("non-positive diagonal {d:e} in row {i}")))
            }
        })
        .collect::<Result<_>>()?;
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(0);
    }
    let mut r = a.mul_vec(x);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        if dot(&r, &r).sqrt() <= tol * bnorm {
            return Ok(it);
        }
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::LinearSolver(format!(
                "CG breakdown: p^T A p = {pap:e}; matrix is not SPD"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::LinearSolver(format!("CG did not converge in {max_iter} iterations")))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 1D Dirichlet Laplacian tridiag(-1, 2, -1).
    fn laplace_1d(n: usize) -> CsrMatrix {
        let rows: Vec<Vec<usize>> = (0..n)
            .map(|i| (i.saturating_sub(1)..=(i + 1).min(n - 1)).collect())
            .collect();
        let mut a = CsrMatrix::from_pattern(&rows);
        for i in 0..n {
            for j in rows[i].clone() {
                let k = a.slot(i, j).unwrap();
                a.values[k] = if i == j { 2.0 } else { -1.0 };
            }
        }
        a
    }

    #[test]
    fn both_solvers_agree_on_laplace() {
        let n = 50;
        let a = laplace_1d(n);
        assert!(a.is_symmetric(0.0));
        let exact: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.mul_vec(&exact);
        for kind in [LinearSolverKind::Direct, LinearSolverKind::ConjugateGradient] {
            let mut s = SpdSolver::new(kind, 1e-14);
            let mut x = vec![0.0; n];
            s.solve(&a, &b, &mut x).unwrap();
            let err = x.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-10, "{kind:?}: {err}");
            // second solve reuses the symbolic analysis
            s.solve(&a, &b, &mut x).unwrap();
        }
    }

    #[test]
    fn indefinite_matrix_is_reported() {
        let mut a = laplace_1d(4);
        let k = a.slot(2, 2).unwrap();
        a.values[k] = -5.0;
        let b = vec![1.0; 4];
        let mut x = vec![0.0; 4];
        assert!(SpdSolver::new(LinearSolverKind::Direct, 1e-12).solve(&a, &b, &mut x).is_err());
        let mut x = vec![0.0; 4];
        assert!(SpdSolver::new(LinearSolverKind::ConjugateGradient, 1e-12).solve(&a, &b, &mut x).is_err());
    }
}
