//! Sparse symmetric storage and thin wrappers over faer factorizations.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt as SparseLlt, Lu as SparseLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, MatRef, Side};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite ({context})")]
    NotPositiveDefinite { context: String },
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
    #[error("dense eigendecomposition failed to converge")]
    EigenFailure,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Compressed sparse row matrix. Assembled matrices are symmetric by
/// construction since every local contribution is symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
    /// Set by assembly routines whose form is positive semidefinite.
    pub psd: bool,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets, summing duplicates in a fixed
    /// order so the result does not depend on how the triplets were produced
    /// as long as their sequence is fixed.
    pub fn from_triplets(nrows: usize, ncols: usize, mut trips: Vec<(usize, usize, f64)>) -> Self {
        trips.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(trips.len());
        let mut values: Vec<f64> = Vec::with_capacity(trips.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trips {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { nrows, ncols, row_ptr, col_idx, values, psd: false }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&j) {
            Ok(pos) => self.values[self.row_ptr[i] + pos],
            Err(_) => 0.0,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (self.col_idx[p], self.values[p]))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[p] * x[self.col_idx[p]];
            }
            *yi = s;
        }
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.matvec(x))
    }

    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.matvec(y))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise asymmetry `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Extracts the block with the given row and column index lists.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> CsrMatrix {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (k, &c) in cols.iter().enumerate() {
            col_map[c] = k;
        }
        let mut trips = Vec::new();
        for (ri, &r) in rows.iter().enumerate() {
            for (c, v) in self.row(r) {
                let cj = col_map[c];
                if cj != usize::MAX {
                    trips.push((ri, cj, v));
                }
            }
        }
        let mut out = CsrMatrix::from_triplets(rows.len(), cols.len(), trips);
        out.psd = self.psd && rows == cols;
        out
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut trips = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                trips.push((j, i, v));
            }
        }
        CsrMatrix::from_triplets(self.ncols, self.nrows, trips)
    }

    /// `self + s * other`, both of the same shape.
    pub fn add_scaled(&self, s: f64, other: &CsrMatrix) -> CsrMatrix {
        let mut trips = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.nrows {
            trips.extend(self.row(i).map(|(j, v)| (i, j, v)));
            trips.extend(other.row(i).map(|(j, v)| (i, j, s * v)));
        }
        CsrMatrix::from_triplets(self.nrows, self.ncols, trips)
    }

    /// Applies a symmetric permutation `P A P^T` where `perm[old] = new`.
    pub fn permute(&self, perm: &[usize]) -> CsrMatrix {
        let mut trips = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                trips.push((perm[i], perm[j], v));
            }
        }
        let mut out = CsrMatrix::from_triplets(self.nrows, self.ncols, trips);
        out.psd = self.psd;
        out
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn to_faer(&self) -> SparseColMat<usize, f64> {
        let mut trips = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                trips.push(Triplet::new(i, j, v));
            }
        }
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &trips)
            .expect("csr indices are in range")
    }

    /// Dense product `self * x` for a dense column block.
    pub fn mul_dense(&self, x: MatRef<'_, f64>) -> Mat<f64> {
        let mut out = Mat::zeros(self.nrows, x.ncols());
        for c in 0..x.ncols() {
            for i in 0..self.nrows {
                let mut s = 0.0;
                for (j, v) in self.row(i) {
                    s += v * x[(j, c)];
                }
                out[(i, c)] = s;
            }
        }
        out
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Sparse symmetric positive definite solver (supernodal Cholesky).
pub struct CholeskySolver {
    llt: SparseLlt<usize, f64>,
    n: usize,
}

impl CholeskySolver {
    pub fn new(a: &CsrMatrix, context: &str) -> Result<Self, LinalgError> {
        let llt = a
            .to_faer()
            .sp_cholesky(Side::Lower)
            .map_err(|_| LinalgError::NotPositiveDefinite { context: context.to_string() })?;
        Ok(Self { llt, n: a.nrows })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut m = Mat::from_fn(self.n, 1, |i, _| b[i]);
        self.llt.solve_in_place(m.as_mut());
        (0..self.n).map(|i| m[(i, 0)]).collect()
    }

    pub fn solve_block(&self, b: &Mat<f64>) -> Mat<f64> {
        let mut m = b.clone();
        self.llt.solve_in_place(m.as_mut());
        m
    }
}

/// Sparse LU for the symmetric indefinite saddle systems.
pub struct LuSolver {
    lu: SparseLu<usize, f64>,
    n: usize,
}

impl LuSolver {
    pub fn new(a: &CsrMatrix) -> Result<Self, LinalgError> {
        let lu = a.to_faer().sp_lu().map_err(|e| LinalgError::Factorization(format!("{e:?}")))?;
        Ok(Self { lu, n: a.nrows })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut m = Mat::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_in_place(m.as_mut());
        (0..self.n).map(|i| m[(i, 0)]).collect()
    }
}

/// Eigenpairs of a dense symmetric matrix, ascending.
pub fn dense_sym_eigen(a: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>), LinalgError> {
    let n = a.nrows();
    let sym = Mat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let evd = sym.self_adjoint_eigen(Side::Lower).map_err(|_| LinalgError::EigenFailure)?;
    let s = evd.S();
    let values: Vec<f64> = (0..n).map(|i| s[i]).collect();
    Ok((values, evd.U().to_owned()))
}

/// Dense symmetric-definite generalized problem `A x = theta B x` with `B`
/// positive definite. Eigenvectors are `B`-orthonormal.
pub fn dense_generalized_eigen(a: &Mat<f64>, b: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>), LinalgError> {
    let n = a.nrows();
    let bs = Mat::from_fn(n, n, |i, j| 0.5 * (b[(i, j)] + b[(j, i)]));
    let llt = bs
        .llt(Side::Lower)
        .map_err(|_| LinalgError::NotPositiveDefinite { context: "dense mass".into() })?;
    let l = llt.L().to_owned();
    // C = L^{-1} A L^{-T}
    let mut la = a.clone();
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(l.as_ref(), la.as_mut(), faer::Par::Seq);
    let mut c = la.transpose().to_owned();
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(l.as_ref(), c.as_mut(), faer::Par::Seq);
    let (values, y) = dense_sym_eigen(&c)?;
    let mut x = y;
    faer::linalg::triangular_solve::solve_upper_triangular_in_place(
        l.transpose(),
        x.as_mut(),
        faer::Par::Seq,
    );
    Ok((values, x))
}

/// Orthonormal basis of the null space of a dense `m x n` constraint matrix
/// (`m < n`), from a full QR of its transpose.
pub fn null_space(c: &Mat<f64>) -> Mat<f64> {
    let m = c.nrows();
    let n = c.ncols();
    let ct = c.transpose().to_owned();
    let q = ct.qr().compute_Q();
    let rank = m.min(n);
    Mat::from_fn(n, n - rank, |i, j| q[(i, rank + j)])
}

pub fn column(m: &Mat<f64>, j: usize) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, t)
    }

    #[test]
    fn duplicates_are_summed() {
        let m = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (1, 1, 2.0), (0, 0, 0.5)]);
        assert_eq!(m.get(0, 0), 1.5);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn cholesky_solves() {
        let a = laplace_1d(6);
        let s = CholeskySolver::new(&a, "test").unwrap();
        let b: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let x = s.solve(&b);
        let r = a.matvec(&x);
        for i in 0..6 {
            assert!((r[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn generalized_dense() {
        let a = Mat::from_fn(3, 3, |i, j| if i == j { (i + 1) as f64 } else { 0.0 });
        let b = Mat::from_fn(3, 3, |i, j| if i == j { 2.0 } else { 0.0 });
        let (vals, _) = dense_generalized_eigen(&a, &b).unwrap();
        assert!((vals[0] - 0.5).abs() < 1e-14 && (vals[2] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn null_space_is_orthogonal() {
        let c = Mat::from_fn(1, 4, |_, j| (j + 1) as f64);
        let z = null_space(&c);
        assert_eq!(z.ncols(), 3);
        for k in 0..3 {
            let s: f64 = (0..4).map(|i| c[(0, i)] * z[(i, k)]).sum();
            assert!(s.abs() < 1e-13);
        }
    }
}
