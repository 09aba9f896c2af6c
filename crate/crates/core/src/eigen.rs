//! Smallest eigenpairs of symmetric generalized problems `A x = theta B x`.
//!
//! Large problems use block shift-invert Lanczos in the `B` inner product
//! with full reorthogonalization and thick restarts; small or constrained
//! problems go through a dense reduction.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, dot, CholeskySolver, CsrMatrix, LinalgError};

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("eigensolver did not converge after {iterations} iterations (worst residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("B is not positive definite on the constraint subspace")]
    IndefiniteMass,
    #[error("A is not positive semidefinite")]
    IndefiniteStiffness,
    #[error("requested {requested} eigenpairs but only {available} finite ones exist")]
    TooFew { requested: usize, available: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Relative residual tolerance of the shift-invert iteration.
    pub tol: f64,
    pub cluster_tol: f64,
    /// Problems up to this size are solved densely.
    pub dense_threshold: usize,
    pub block: usize,
    pub max_basis: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            cluster_tol: 5e-3,
            dense_threshold: 2000,
            block: 4,
            max_basis: 160,
            max_restarts: 40,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    /// Zero-based index of the first member.
    pub start: usize,
    pub multiplicity: usize,
    pub value: f64,
}

impl Cluster {
    pub fn contains(&self, i: usize) -> bool {
        i >= self.start && i < self.start + self.multiplicity
    }
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    pub values: Vec<f64>,
    /// `B`-orthonormal eigenvectors.
    pub vectors: Vec<Vec<f64>>,
    /// Normwise backward error `|Ax - theta Bx| / ((|A| + |theta| |B|) |x|)`.
    pub residual_norms: Vec<f64>,
    pub clusters: Vec<Cluster>,
    /// Directions with infinite quotient (`B x = 0`) excluded from the result.
    pub infinite_count: usize,
}

impl EigenResult {
    /// Cluster containing the zero-based index `i`.
    pub fn cluster_of(&self, i: usize) -> Option<&Cluster> {
        self.clusters.iter().find(|c| c.contains(i))
    }
}

/// Restriction applied before solving.
#[derive(Debug, Clone)]
pub enum Constraint {
    None,
    /// Keep only these dofs (homogeneous Dirichlet elimination).
    Keep(Vec<usize>),
    /// Linear constraints `C x = 0`, imposed on an explicit null-space basis.
    Linear(Mat<f64>),
}

/// Greedy clustering of ascending values: a value joins the current cluster
/// while its gap to the previous one is at most `tol * max(1, |value|)`.
pub fn cluster(values: &[f64], tol: f64) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        if let Some(last) = out.last_mut() {
            let prev = values[i - 1];
            if (v - prev).abs() <= tol * v.abs().max(1.0) {
                last.multiplicity += 1;
                continue;
            }
        }
        out.push(Cluster { start: i, multiplicity: 1, value: v });
    }
    for c in &mut out {
        c.value = values[c.start..c.start + c.multiplicity].iter().sum::<f64>() / c.multiplicity as f64;
    }
    out
}

pub fn solve_smallest(
    a: &CsrMatrix,
    b: &CsrMatrix,
    k: usize,
    constraint: &Constraint,
    opts: &SolverOptions,
) -> Result<EigenResult, EigenError> {
    match constraint {
        Constraint::None => solve_unconstrained(a, b, k, opts),
        Constraint::Keep(dofs) => {
            let ar = a.submatrix(dofs, dofs);
            let br = b.submatrix(dofs, dofs);
            let mut res = solve_unconstrained(&ar, &br, k, opts)?;
            let n = a.nrows;
            res.vectors = res
                .vectors
                .iter()
                .map(|x| {
                    let mut full = vec![0.0; n];
                    for (&d, &v) in dofs.iter().zip(x) {
                        full[d] = v;
                    }
                    full
                })
                .collect();
            Ok(res)
        }
        Constraint::Linear(c) => {
            let z = linalg::null_space(c);
            let ad = a.to_dense();
            let bd = b.to_dense();
            let az = z.transpose() * &ad * &z;
            let bz = z.transpose() * &bd * &z;
            let mut res = solve_dense(&az, &bz, k, opts)?;
            res.vectors = res
                .vectors
                .iter()
                .map(|y| {
                    let ym = Mat::from_fn(y.len(), 1, |i, _| y[i]);
                    linalg::column(&(&z * &ym), 0)
                })
                .collect();
            let a_norm = a.norm_inf();
            let b_norm = b.norm_inf();
            res.residual_norms = res
                .values
                .iter()
                .zip(&res.vectors)
                .map(|(&t, x)| backward_error(&|v| a.matvec(v), &|v| b.matvec(v), a_norm, b_norm, t, x))
                .collect();
            Ok(res)
        }
    }
}

fn solve_unconstrained(a: &CsrMatrix, b: &CsrMatrix, k: usize, opts: &SolverOptions) -> Result<EigenResult, EigenError> {
    let n = a.nrows;
    if n <= opts.dense_threshold || k + 2 * opts.block >= n {
        let mut res = solve_dense(&a.to_dense(), &b.to_dense(), k, opts)?;
        let (an, bn) = (a.norm_inf(), b.norm_inf());
        res.residual_norms = res
            .values
            .iter()
            .zip(&res.vectors)
            .map(|(&t, x)| backward_error(&|v| a.matvec(v), &|v| b.matvec(v), an, bn, t, x))
            .collect();
        return Ok(res);
    }
    let sigma = default_shift(a.trace(), b.trace());
    let shifted = a.add_scaled(-sigma, b);
    let solver = CholeskySolver::new(&shifted, "A - sigma B")?;
    let op = |y: &[f64]| solver.solve(&b.matvec(y));
    let (values, vectors) = shift_invert_lanczos(n, &op, &|v| b.matvec(v), sigma, k, opts)?;
    let (an, bn) = (a.norm_inf(), b.norm_inf());
    let residual_norms = values
        .iter()
        .zip(&vectors)
        .map(|(&t, x)| backward_error(&|v| a.matvec(v), &|v| b.matvec(v), an, bn, t, x))
        .collect();
    Ok(EigenResult { clusters: cluster(&values, opts.cluster_tol), values, vectors, residual_norms, infinite_count: 0 })
}

/// `sigma = -1e-8 * tr(A) / tr(B)`, slightly below zero so that positive
/// semidefinite `A` gives a definite shifted matrix.
pub fn default_shift(trace_a: f64, trace_b: f64) -> f64 {
    -1e-8 * (trace_a / trace_b).abs().max(f64::MIN_POSITIVE)
}

pub fn backward_error(
    amul: &dyn Fn(&[f64]) -> Vec<f64>,
    bmul: &dyn Fn(&[f64]) -> Vec<f64>,
    a_norm: f64,
    b_norm: f64,
    theta: f64,
    x: &[f64],
) -> f64 {
    let ax = amul(x);
    let bx = bmul(x);
    let r: f64 = ax.iter().zip(&bx).map(|(p, q)| (p - theta * q).powi(2)).sum::<f64>().sqrt();
    let xn = linalg::norm2(x);
    r / ((a_norm + theta.abs() * b_norm) * xn).max(f64::MIN_POSITIVE)
}

/// Dense generalized problem, solved in inverted form
/// `B x = tau (A - sigma B) x`, `theta = sigma + 1 / tau`, so that the wanted
/// small eigenvalues are the dominant ones and keep their relative accuracy.
/// `B` may be semidefinite; directions with `tau ~ 0` have infinite quotient
/// and are counted, not returned.
pub fn solve_dense(a: &Mat<f64>, b: &Mat<f64>, k: usize, opts: &SolverOptions) -> Result<EigenResult, EigenError> {
    let n = a.nrows();
    let ta: f64 = (0..n).map(|i| a[(i, i)]).sum();
    let tb: f64 = (0..n).map(|i| b[(i, i)]).sum();
    if !(tb > 0.0) {
        return Err(EigenError::IndefiniteMass);
    }
    let mut sigma = -1e-3 * (ta / tb).abs().max(f64::MIN_POSITIVE);
    let mut solved = None;
    for _ in 0..3 {
        let shifted = Mat::from_fn(n, n, |i, j| a[(i, j)] - sigma * b[(i, j)]);
        match linalg::dense_generalized_eigen(b, &shifted) {
            Ok(r) => {
                solved = Some(r);
                break;
            }
            Err(LinalgError::NotPositiveDefinite { .. }) => sigma *= 100.0,
            Err(e) => return Err(e.into()),
        }
    }
    let (tau, x) = solved.ok_or(EigenError::IndefiniteStiffness)?;
    if tau[0] < -1e-10 * tau[n - 1].abs() {
        return Err(EigenError::IndefiniteMass);
    }
    let tmax = tau[n - 1];
    let finite = tau.iter().filter(|&&t| t > 1e-12 * tmax).count();
    if finite < k {
        return Err(EigenError::TooFew { requested: k, available: finite });
    }
    // tau descending gives theta ascending; x^T B x = tau
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    for j in (0..n).rev().take(k) {
        values.push(sigma + 1.0 / tau[j]);
        let s = 1.0 / tau[j].sqrt();
        vectors.push((0..n).map(|i| x[(i, j)] * s).collect());
    }
    Ok(EigenResult {
        clusters: cluster(&values, opts.cluster_tol),
        values,
        vectors,
        residual_norms: vec![0.0; k],
        infinite_count: n - finite,
    })
}

/// Block shift-invert Lanczos. `op` applies `(A - sigma B)^{-1} B`, which is
/// self-adjoint in the `B` inner product. Returns the `k` eigenvalues of the
/// pencil closest to `sigma` from above, ascending, with `B`-orthonormal
/// vectors.
pub fn shift_invert_lanczos(
    n: usize,
    op: &dyn Fn(&[f64]) -> Vec<f64>,
    bmul: &dyn Fn(&[f64]) -> Vec<f64>,
    sigma: f64,
    k: usize,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), EigenError> {
    let block = opts.block.max(1);
    let max_basis = opts.max_basis.max(k + 3 * block).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v: Vec<Vec<f64>> = Vec::new();
    let mut bv: Vec<Vec<f64>> = Vec::new();
    let mut y: Vec<Vec<f64>> = Vec::new();
    let mut t: Vec<Vec<f64>> = Vec::new();

    let mut candidates: Vec<Vec<f64>> = (0..block)
        .map(|_| {
            let r: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
            op(&r)
        })
        .collect();
    let mut expanded = 0usize;
    let mut iterations = 0usize;
    let mut restarts = 0usize;
    loop {
        iterations += 1;
        let first_new = v.len();
        for w in candidates.drain(..) {
            if let Some((q, bq)) = b_orthonormalize(w, &v, &bv, bmul) {
                v.push(q);
                bv.push(bq);
            }
        }
        if v.len() == first_new && expanded >= y.len() {
            // Krylov space exhausted, inject a fresh random direction
            let r: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
            if let Some((q, bq)) = b_orthonormalize(op(&r), &v, &bv, bmul) {
                v.push(q);
                bv.push(bq);
            }
        }
        for j in y.len()..v.len() {
            y.push(op(&v[j]));
        }
        // incremental projected matrix T = (B V)^T Op V
        let m = v.len();
        for row in t.iter_mut() {
            row.resize(m, 0.0);
        }
        while t.len() < m {
            t.push(vec![0.0; m]);
        }
        for j in first_new..m {
            for i in 0..m {
                let val = dot(&bv[i], &y[j]);
                t[i][j] = val;
                t[j][i] = val;
            }
        }
        let tm = Mat::from_fn(m, m, |i, j| 0.5 * (t[i][j] + t[j][i]));
        let (tv, s) = linalg::dense_sym_eigen(&tm)?;
        // largest t correspond to smallest theta above sigma
        let order: Vec<usize> = (0..m).rev().collect();
        let kk = k.min(m);
        let mut worst: f64 = 0.0;
        let mut ritz: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::with_capacity(kk);
        for &j in order.iter().take(kk) {
            let coeffs = linalg::column(&s, j);
            let x = combine(&v, &coeffs);
            let ox = combine(&y, &coeffs);
            let r: Vec<f64> = ox.iter().zip(&x).map(|(p, q)| p - tv[j] * q).collect();
            let rn = dot(&r, &bmul(&r)).max(0.0).sqrt() / tv[j].abs().max(f64::MIN_POSITIVE);
            worst = worst.max(rn);
            ritz.push((tv[j], x, ox));
        }
        if kk == k && worst <= opts.tol {
            let mut pairs: Vec<(f64, Vec<f64>)> = ritz.into_iter().map(|(tj, x, _)| (sigma + 1.0 / tj, x)).collect();
            pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
            return Ok(pairs.into_iter().unzip());
        }
        if m == n {
            return Err(EigenError::NoConvergence { iterations, residual: worst });
        }
        if m + block > max_basis {
            restarts += 1;
            if restarts > opts.max_restarts {
                return Err(EigenError::NoConvergence { iterations, residual: worst });
            }
            let keep = (k + 2 * block).min(m);
            let cols: Vec<Vec<f64>> = order.iter().take(keep).map(|&j| linalg::column(&s, j)).collect();
            let nv: Vec<Vec<f64>> = cols.iter().map(|c| combine(&v, c)).collect();
            let nbv: Vec<Vec<f64>> = cols.iter().map(|c| combine(&bv, c)).collect();
            let ny: Vec<Vec<f64>> = cols.iter().map(|c| combine(&y, c)).collect();
            t = (0..keep)
                .map(|i| (0..keep).map(|j| if i == j { tv[order[i]] } else { 0.0 }).collect())
                .collect();
            v = nv;
            bv = nbv;
            y = ny;
            expanded = 0;
        }
        let end = (expanded + block).min(y.len());
        candidates = y[expanded..end].to_vec();
        expanded = end;
        if iterations > 10_000 {
            return Err(EigenError::NoConvergence { iterations, residual: worst });
        }
    }
}

fn combine(basis: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; basis[0].len()];
    for (b, &c) in basis.iter().zip(coeffs) {
        if c != 0.0 {
            linalg::axpy(c, b, &mut out);
        }
    }
    out
}

/// Two-pass classical Gram-Schmidt in the `B` inner product.
fn b_orthonormalize(
    mut w: Vec<f64>,
    v: &[Vec<f64>],
    bv: &[Vec<f64>],
    bmul: &dyn Fn(&[f64]) -> Vec<f64>,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let bw0 = bmul(&w);
    let norm0 = dot(&w, &bw0).max(0.0).sqrt();
    if norm0 == 0.0 {
        return None;
    }
    for _ in 0..2 {
        let coeffs: Vec<f64> = bv.iter().map(|b| dot(b, &w)).collect();
        for (q, c) in v.iter().zip(coeffs) {
            linalg::axpy(-c, q, &mut w);
        }
    }
    let bw = bmul(&w);
    let norm = dot(&w, &bw).max(0.0).sqrt();
    if norm <= 1e-10 * norm0 {
        return None;
    }
    Some((w.iter().map(|x| x / norm).collect(), bw.iter().map(|x| x / norm).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_problem() {
        let a = CsrMatrix::from_triplets(3, 3, vec![(0, 0, 1.0), (1, 1, 2.0), (2, 2, 3.0)]);
        let b = CsrMatrix::identity(3);
        let r = solve_smallest(&a, &b, 2, &Constraint::None, &SolverOptions::default()).unwrap();
        assert!((r.values[0] - 1.0).abs() < 1e-14 && (r.values[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn clustering_examples() {
        let c = cluster(&[5.78, 14.68, 14.69], 1e-2);
        assert_eq!(c.len(), 2);
        assert_eq!(c[1].multiplicity, 2);
        assert_eq!(cluster(&[1.0, 2.0, 3.0], 0.0).len(), 3);
        assert_eq!(cluster(&[0.0, 0.0, 0.0], 0.0)[0].multiplicity, 3);
    }

    #[test]
    fn lanczos_matches_dense_on_path_laplacian() {
        let n = 400;
        let mut trips = Vec::new();
        for i in 0..n {
            trips.push((i, i, 2.0));
            if i + 1 < n {
                trips.push((i, i + 1, -1.0));
                trips.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, trips);
        let b = CsrMatrix::identity(n);
        let opts = SolverOptions { dense_threshold: 10, ..Default::default() };
        let r = solve_smallest(&a, &b, 6, &Constraint::None, &opts).unwrap();
        for (j, v) in r.values.iter().enumerate() {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * (j + 1) as f64 / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-10 * exact, "{j}: {v} vs {exact}");
        }
        assert!(r.residual_norms.iter().all(|&x| x < 1e-10));
    }
}
