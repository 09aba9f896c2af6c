//! Discrete versions of the seven eigenvalue problems.
//!
//! Reported eigenvalues are those of `-Delta` (nonnegative), indexed from one
//! in reports and repeated according to multiplicity.
//!
//! The two biharmonic Steklov problems are reduced to harmonic functions:
//! eigenfunctions satisfy `Delta^2 u = 0`, so `w = Delta u` is harmonic and
//! both quotients can be written in terms of the boundary trace of `w`.
//! Buckling and clamped plate use the Ciarlet-Raviart mixed form with the
//! auxiliary unknown `w = -Delta_h u`.

use std::fmt;

use faer::Mat;
use serde::Serialize;
use thiserror::Error;

use crate::eigen::{self, cluster, Constraint, EigenError, EigenResult, SolverOptions};
use crate::fem::{FeSpace, FemError, Forms};
use crate::geometry::Domain;
use crate::linalg::{self, CholeskySolver, CsrMatrix, LinalgError, LuSolver};
use crate::mesh::Mesh;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("{0} needs P2 elements")]
    RequiresP2(ProblemKind),
    #[error("{kind}: requested {requested} eigenvalues but the discrete space supports only {available}")]
    TooFew { kind: ProblemKind, requested: usize, available: usize },
    #[error("{kind}: constraint null space has dimension {dimension}, mesh too coarse")]
    ConstraintTooSmall { kind: ProblemKind, dimension: usize },
    #[error("{kind}: the denominator form is singular")]
    SingularDenominator { kind: ProblemKind },
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Fem(#[from] FemError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Dirichlet,
    Neumann,
    Steklov,
    Bsteklov1,
    Bsteklov2,
    Buckling,
    Clamped,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 7] = [
        ProblemKind::Dirichlet,
        ProblemKind::Neumann,
        ProblemKind::Steklov,
        ProblemKind::Bsteklov1,
        ProblemKind::Bsteklov2,
        ProblemKind::Buckling,
        ProblemKind::Clamped,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Dirichlet => "dirichlet",
            ProblemKind::Neumann => "neumann",
            ProblemKind::Steklov => "steklov",
            ProblemKind::Bsteklov1 => "bsteklov1",
            ProblemKind::Bsteklov2 => "bsteklov2",
            ProblemKind::Buckling => "buckling",
            ProblemKind::Clamped => "clamped",
        }
    }

    /// Conventional symbol of the eigenvalue (`Gamma^2` for the clamped plate).
    pub fn symbol(self) -> &'static str {
        match self {
            ProblemKind::Dirichlet => "lambda",
            ProblemKind::Neumann => "mu",
            ProblemKind::Steklov => "sigma",
            ProblemKind::Bsteklov1 => "eta",
            ProblemKind::Bsteklov2 => "xi",
            ProblemKind::Buckling => "Lambda",
            ProblemKind::Clamped => "Gamma^2",
        }
    }

    pub fn parse(s: &str) -> Option<ProblemKind> {
        ProblemKind::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Power of length by which eigenvalues scale: `value(t Omega) = t^-p value(Omega)`.
    pub fn length_exponent(self) -> i32 {
        match self {
            ProblemKind::Steklov | ProblemKind::Bsteklov1 => 1,
            ProblemKind::Dirichlet | ProblemKind::Neumann | ProblemKind::Buckling => 2,
            ProblemKind::Bsteklov2 => 3,
            ProblemKind::Clamped => 4,
        }
    }

    pub fn is_biharmonic(self) -> bool {
        matches!(self, ProblemKind::Bsteklov1 | ProblemKind::Bsteklov2 | ProblemKind::Buckling | ProblemKind::Clamped)
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Finite element space and assembled forms for one domain and mesh.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub domain: Domain,
    pub space: FeSpace,
    pub forms: Forms,
}

impl Discretization {
    pub fn new(domain: &Domain, mesh: &Mesh, order: usize, mass_degree: usize) -> Result<Self, ProblemError> {
        faer::set_global_parallelism(faer::Par::Seq);
        let space = FeSpace::new(mesh, order)?;
        let forms = Forms::assemble(&space, &domain.metric, mass_degree)?;
        Ok(Self { domain: domain.clone(), space, forms })
    }

    pub fn dof_count(&self) -> usize {
        self.space.dof_count()
    }
}

#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub kind: ProblemKind,
    pub eigen: EigenResult,
    /// Discrete Laplacian `Delta_h u` of each eigenvector, biharmonic problems only.
    pub laplacians: Vec<Vec<f64>>,
    pub domain: String,
    pub dof_count: usize,
}

impl SpectralResult {
    pub fn values(&self) -> &[f64] {
        &self.eigen.values
    }

    /// One-based access, matching the usual `lambda_1 <= lambda_2 <= ...`.
    pub fn value(&self, index: usize) -> f64 {
        self.eigen.values[index - 1]
    }

    /// Multiplicity of the cluster containing the one-based index.
    pub fn multiplicity(&self, index: usize) -> usize {
        self.eigen.cluster_of(index - 1).map_or(1, |c| c.multiplicity)
    }
}

pub fn solve(kind: ProblemKind, disc: &Discretization, k: usize, opts: &SolverOptions) -> Result<SpectralResult, ProblemError> {
    match kind {
        ProblemKind::Dirichlet => dirichlet_spectrum(disc, k, opts),
        ProblemKind::Neumann => neumann_spectrum(disc, k, opts),
        ProblemKind::Steklov => steklov_spectrum(disc, k, opts),
        ProblemKind::Bsteklov1 => bsteklov1_spectrum(disc, k, opts),
        ProblemKind::Bsteklov2 => bsteklov2_spectrum(disc, k, opts),
        ProblemKind::Buckling => buckling_spectrum(disc, k, opts),
        ProblemKind::Clamped => clamped_spectrum(disc, k, opts),
    }
}

/// Solves several problems on one discretization concurrently. Results come
/// back in the order of `kinds`.
pub fn solve_many(
    kinds: &[ProblemKind],
    disc: &Discretization,
    k: usize,
    opts: &SolverOptions,
) -> Vec<Result<SpectralResult, ProblemError>> {
    use rayon::prelude::*;
    kinds.par_iter().map(|&kind| solve(kind, disc, k, opts)).collect()
}

fn wrap(kind: ProblemKind, disc: &Discretization, eigen: EigenResult, laplacians: Vec<Vec<f64>>) -> SpectralResult {
    SpectralResult { kind, eigen, laplacians, domain: disc.domain.name.clone(), dof_count: disc.dof_count() }
}

fn check_count(kind: ProblemKind, k: usize, available: usize) -> Result<(), ProblemError> {
    if k == 0 || k > available {
        return Err(ProblemError::TooFew { kind, requested: k, available });
    }
    Ok(())
}

fn require_p2(kind: ProblemKind, disc: &Discretization) -> Result<(), ProblemError> {
    if disc.space.order != 2 {
        return Err(ProblemError::RequiresP2(kind));
    }
    Ok(())
}

/// `K x = lambda M x` on interior dofs.
pub fn dirichlet_spectrum(disc: &Discretization, k: usize, opts: &SolverOptions) -> Result<SpectralResult, ProblemError> {
    let kind = ProblemKind::Dirichlet;
    check_count(kind, k, disc.space.interior_dofs.len())?;
    let f = &disc.forms;
    let eigen = eigen::solve_smallest(&f.stiffness, &f.mass, k, &Constraint::Keep(disc.space.interior_dofs.clone()), opts)?;
    Ok(wrap(kind, disc, eigen, Vec::new()))
}

/// `K x = mu M x` on all dofs.
pub fn neumann_spectrum(disc: &Discretization, k: usize, opts: &SolverOptions) -> Result<SpectralResult, ProblemError> {
    let kind = ProblemKind::Neumann;
    check_count(kind, k, disc.dof_count())?;
    let f = &disc.forms;
    let eigen = eigen::solve_smallest(&f.stiffness, &f.mass, k, &Constraint::None, opts)?;
    Ok(wrap(kind, disc, eigen, Vec::new()))
}

/// `K x = sigma B x`. Eliminating the interior gives the Schur complement on
/// boundary dofs; the interior directions have infinite quotient.
pub fn steklov_spectrum(disc: &Discretization, k: usize, opts: &SolverOptions) -> Result<SpectralResult, ProblemError> {
    let kind = ProblemKind::Steklov;
    let space = &disc.space;
    let nb = space.boundary_dofs.len();
    check_count(kind, k, nb)?;
    let f = &disc.forms;
    let h = harmonic_extension(disc)?;
    let s = gram(&h, &f.stiffness);
    let bbb = f.boundary_mass.submatrix(&space.boundary_dofs, &space.boundary_dofs).to_dense();
    let mut eigen = eigen::solve_dense(&s, &bbb, k, opts)?;
    eigen.vectors = eigen.vectors.iter().map(|g| apply(&h, g)).collect();
    let (an, bn) = (f.stiffness.norm_inf(), f.boundary_mass.norm_inf());
    eigen.residual_norms = eigen
        .values
        .iter()
        .zip(&eigen.vectors)
        .map(|(&t, x)| {
            eigen::backward_error(&|v| f.stiffness.matvec(v), &|v| f.boundary_mass.matvec(v), an, bn, t, x)
        })
        .collect();
    eigen.infinite_count = disc.dof_count() - nb;
    Ok(wrap(kind, disc, eigen, Vec::new()))
}

/// Biharmonic Steklov I. For harmonic `w = Delta u` with `u = 0` on the
/// boundary, `int w h = (1/eta) int_bd w h` for every harmonic `h`, so `eta`
/// solves `B_bb g = eta (H^T M H) g` over boundary traces `g` of discrete
/// harmonic functions `H g`. `u` is recovered from `Delta_h u = w`, `u = 0`
/// on the boundary, and normalized to `int_bd (d_nu u)^2 = 1`.
pub fn bsteklov1_spectrum(disc: &Discretization, k: usize, opts: &SolverOptions) -> Result<SpectralResult, ProblemError> {
    let kind = ProblemKind::Bsteklov1;
    require_p2(kind, disc)?;
    let space = &disc.space;
    let nb = space.boundary_dofs.len();
    check_count(kind, k, nb)?;
    let f = &disc.forms;
    let h = harmonic_extension(disc)?;
    let gm = gram(&h, &f.mass);
    let bbb = f.boundary_mass.submatrix(&space.boundary_dofs, &space.boundary_dofs).to_dense();
    let mut eigen = eigen::solve_dense(&bbb, &gm, k, opts).map_err(|e| match e {
        EigenError::Linalg(LinalgError::NotPositiveDefinite { .. }) | EigenError::IndefiniteMass => {
            ProblemError::SingularDenominator { kind }
        }
        e => e.into(),
    })?;
    eigen.residual_norms = dense_backward_errors(&bbb, &gm, &eigen.values, &eigen.vectors);

    let kii = f.stiffness.submatrix(&space.interior_dofs, &space.interior_dofs);
    let chol = CholeskySolver::new(&kii, "interior stiffness")?;
    let mut laplacians = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    for (g, &eta) in eigen.vectors.iter().zip(&eigen.values) {
        let scale = eta.max(0.0).sqrt();
        let w: Vec<f64> = apply(&h, g).iter().map(|x| x * scale).collect();
        let mw = f.mass.matvec(&w);
        let rhs: Vec<f64> = space.interior_dofs.iter().map(|&d| -mw[d]).collect();
        let ui = chol.solve(&rhs);
        vectors.push(space.expand(&space.interior_dofs, &ui));
        laplacians.push(w);
    }
    eigen.vectors = vectors;
    Ok(wrap(kind, disc, eigen, laplacians))
}

/// Biharmonic Steklov II. With `d_nu u = 0`, `w = Delta u` is harmonic with
/// zero mean; `u` solves the Neumann problem `Delta_h u = w` and is fixed by
/// zero boundary mean (orthogonality to the constant eigenfunction). The
/// quotient `int w^2 / int_bd u^2` is minimized over this family, and
/// `xi_1 = 0` is the constant.
pub fn bsteklov2_spectrum(disc: &Discretization, k: usize, opts: &SolverOptions) -> Result<SpectralResult, ProblemError> {
    let kind = ProblemKind::Bsteklov2;
    require_p2(kind, disc)?;
    let space = &disc.space;
    let n = disc.dof_count();
    let nb = space.boundary_dofs.len();
    let f = &disc.forms;
    let h = harmonic_extension(disc)?;
    // mean-zero constraint 1^T M H g = 0
    let mh = f.mass.mul_dense(h.as_ref());
    let c = Mat::from_fn(1, nb, |_, j| (0..n).map(|i| mh[(i, j)]).sum::<f64>());
    let z = linalg::null_space(&c);
    if z.ncols() + 1 < k || z.ncols() == 0 {
        return Err(ProblemError::ConstraintTooSmall { kind, dimension: z.ncols() });
    }
    let w = &h * &z;
    let mw = f.mass.mul_dense(w.as_ref());

    // Neumann solves K u = -M w with the first dof pinned
    let rest: Vec<usize> = (1..n).collect();
    let krr = f.stiffness.submatrix(&rest, &rest);
    let chol = CholeskySolver::new(&krr, "pinned stiffness")?;
    let rhs = Mat::from_fn(n - 1, w.ncols(), |i, j| -mw[(i + 1, j)]);
    let ur = chol.solve_block(&rhs);
    let ones = vec![1.0; n];
    let b1 = f.boundary_mass.matvec(&ones);
    let perimeter = linalg::dot(&b1, &ones);
    let mut u = Mat::zeros(n, w.ncols());
    for j in 0..w.ncols() {
        let mut mean = 0.0;
        for i in 1..n {
            mean += b1[i] * ur[(i - 1, j)];
        }
        mean /= perimeter;
        u[(0, j)] = -mean;
        for i in 1..n {
            u[(i, j)] = ur[(i - 1, j)] - mean;
        }
    }
    let num = w.transpose() * &mw;
    let den = gram(&u, &f.boundary_mass);
    let mut reduced = eigen::solve_dense(&num, &den, k - 1, opts).map_err(|e| match e {
        EigenError::Linalg(LinalgError::NotPositiveDefinite { .. }) | EigenError::IndefiniteMass => {
            ProblemError::SingularDenominator { kind }
        }
        e => e.into(),
    })?;
    reduced.residual_norms = dense_backward_errors(&num, &den, &reduced.values, &reduced.vectors);

    let mut values = vec![0.0];
    let mut vectors = vec![vec![1.0 / perimeter.sqrt(); n]];
    let mut laplacians = vec![vec![0.0; n]];
    let mut residual_norms = vec![0.0];
    for ((&xi, y), r) in reduced.values.iter().zip(&reduced.vectors).zip(&reduced.residual_norms) {
        values.push(xi);
        vectors.push(apply(&u, y));
        laplacians.push(apply(&w, y));
        residual_norms.push(*r);
    }
    let eigen = EigenResult {
        clusters: cluster(&values, opts.cluster_tol),
        values,
        vectors,
        residual_norms,
        infinite_count: 0,
    };
    Ok(wrap(kind, disc, eigen, laplacians))
}

/// Buckling: `int (Delta_h u)^2 / int |grad u|^2` on `H^1_0`.
pub fn buckling_spectrum(disc: &Discretization, k: usize, opts: &SolverOptions) -> Result<SpectralResult, ProblemError> {
    mixed_plate(ProblemKind::Buckling, disc, k, opts)
}

/// Clamped plate: `int (Delta_h u)^2 / int u^2`; the reported value is `Gamma^2`.
pub fn clamped_spectrum(disc: &Discretization, k: usize, opts: &SolverOptions) -> Result<SpectralResult, ProblemError> {
    mixed_plate(ProblemKind::Clamped, disc, k, opts)
}

/// Ciarlet-Raviart: `u` in `V_0`, `w` in `V` with `M w = K_VI u`, so the
/// numerator is `u^T K_IV M^{-1} K_VI u`. Shift-invert uses the saddle
/// system `[[-M, K_VI], [K_IV, -sigma B]]`, which for `sigma < 0` is
/// symmetric quasi-definite.
fn mixed_plate(kind: ProblemKind, disc: &Discretization, k: usize, opts: &SolverOptions) -> Result<SpectralResult, ProblemError> {
    require_p2(kind, disc)?;
    let space = &disc.space;
    let f = &disc.forms;
    let n = disc.dof_count();
    let interior = &space.interior_dofs;
    let ni = interior.len();
    check_count(kind, k, ni)?;
    let all: Vec<usize> = (0..n).collect();
    let kvi = f.stiffness.submatrix(&all, interior);
    let kiv = kvi.transpose();
    let b = match kind {
        ProblemKind::Buckling => f.stiffness.submatrix(interior, interior),
        _ => f.mass.submatrix(interior, interior),
    };
    let mchol = CholeskySolver::new(&f.mass, "mass")?;
    let amul = |x: &[f64]| kiv.matvec(&mchol.solve(&kvi.matvec(x)));

    let mut eigen = if ni <= opts.dense_threshold {
        let x = mchol.solve_block(&kvi.to_dense());
        let a = kvi.to_dense().transpose() * &x;
        let bd = b.to_dense();
        let mut r = eigen::solve_dense(&a, &bd, k, opts)?;
        r.residual_norms = dense_backward_errors(&a, &bd, &r.values, &r.vectors);
        r
    } else {
        // shift on the natural scale of the problem (area^-1 or area^-2)
        let scale = 1.0 / f.mass.quad_form(&vec![1.0; n]);
        let sigma = match kind {
            ProblemKind::Buckling => -scale,
            _ => -scale * scale,
        };
        let mut trips = Vec::with_capacity(f.mass.nnz() + 2 * kvi.nnz() + b.nnz());
        for i in 0..n {
            for (j, v) in f.mass.row(i) {
                trips.push((i, j, -v));
            }
            for (j, v) in kvi.row(i) {
                trips.push((i, n + j, v));
                trips.push((n + j, i, v));
            }
        }
        for i in 0..ni {
            for (j, v) in b.row(i) {
                trips.push((n + i, n + j, -sigma * v));
            }
        }
        let saddle = CsrMatrix::from_triplets(n + ni, n + ni, trips);
        let lu = LuSolver::new(&saddle)?;
        let op = |y: &[f64]| {
            let mut rhs = vec![0.0; n + ni];
            rhs[n..].copy_from_slice(&b.matvec(y));
            lu.solve(&rhs)[n..].to_vec()
        };
        let (values, vectors) = eigen::shift_invert_lanczos(ni, &op, &|v| b.matvec(v), sigma, k, opts)?;
        let a_norm = power_norm(ni, &amul, opts.seed);
        let b_norm = b.norm_inf();
        let residual_norms = values
            .iter()
            .zip(&vectors)
            .map(|(&t, x)| eigen::backward_error(&amul, &|v| b.matvec(v), a_norm, b_norm, t, x))
            .collect();
        EigenResult { clusters: cluster(&values, opts.cluster_tol), values, vectors, residual_norms, infinite_count: 0 }
    };
    let laplacians = eigen.vectors.iter().map(|x| mchol.solve(&kvi.matvec(x)).iter().map(|v| -v).collect()).collect();
    eigen.vectors = eigen.vectors.iter().map(|x| space.expand(interior, x)).collect();
    Ok(wrap(kind, disc, eigen, laplacians))
}

/// Discrete harmonic extension as a dense `n x n_b` matrix: column `j` is the
/// function with trace `e_j` on boundary dofs and `K_II u_I = -K_IB e_j`.
pub fn harmonic_extension(disc: &Discretization) -> Result<Mat<f64>, ProblemError> {
    let space = &disc.space;
    let (bd, int) = (&space.boundary_dofs, &space.interior_dofs);
    let k = &disc.forms.stiffness;
    let kii = k.submatrix(int, int);
    let kib = k.submatrix(int, bd).to_dense();
    let x = if int.is_empty() { Mat::zeros(0, bd.len()) } else { CholeskySolver::new(&kii, "interior stiffness")?.solve_block(&kib) };
    let mut h = Mat::zeros(disc.dof_count(), bd.len());
    for (j, &d) in bd.iter().enumerate() {
        h[(d, j)] = 1.0;
    }
    for (r, &d) in int.iter().enumerate() {
        for j in 0..bd.len() {
            h[(d, j)] = -x[(r, j)];
        }
    }
    Ok(h)
}

/// `X^T A X`, symmetrized.
fn gram(x: &Mat<f64>, a: &CsrMatrix) -> Mat<f64> {
    let ax = a.mul_dense(x.as_ref());
    let g = x.transpose() * &ax;
    Mat::from_fn(g.nrows(), g.ncols(), |i, j| 0.5 * (g[(i, j)] + g[(j, i)]))
}

fn apply(x: &Mat<f64>, y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.nrows()];
    for (j, &c) in y.iter().enumerate() {
        if c != 0.0 {
            for (i, o) in out.iter_mut().enumerate() {
                *o += c * x[(i, j)];
            }
        }
    }
    out
}

fn dense_norm_inf(a: &Mat<f64>) -> f64 {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn dense_backward_errors(a: &Mat<f64>, b: &Mat<f64>, values: &[f64], vectors: &[Vec<f64>]) -> Vec<f64> {
    let (an, bn) = (dense_norm_inf(a), dense_norm_inf(b));
    let mul = |m: &Mat<f64>, x: &[f64]| -> Vec<f64> {
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum()).collect()
    };
    values
        .iter()
        .zip(vectors)
        .map(|(&t, x)| eigen::backward_error(&|v| mul(a, v), &|v| mul(b, v), an, bn, t, x))
        .collect()
}

/// Power-iteration estimate of the 2-norm of a symmetric operator.
fn power_norm(n: usize, amul: &dyn Fn(&[f64]) -> Vec<f64>, seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x9e37);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    let mut est = 0.0;
    for _ in 0..30 {
        let nx = linalg::norm2(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        let y = amul(&x);
        est = linalg::norm2(&y);
        x = y;
    }
    est
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(domain: &Domain, level: usize) -> Discretization {
        Discretization::new(domain, &domain.mesh(level).unwrap(), 2, 4).unwrap()
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ProblemKind::ALL {
            assert_eq!(ProblemKind::parse(k.name()), Some(k));
        }
        assert_eq!(ProblemKind::parse("robin"), None);
    }

    #[test]
    fn disk_steklov_fourier_modes() {
        let d = disc(&Domain::disk(1.0).unwrap(), 2);
        let r = steklov_spectrum(&d, 5, &SolverOptions::default()).unwrap();
        for (v, e) in r.values().iter().zip([0.0, 1.0, 1.0, 2.0, 2.0]) {
            assert!((v - e).abs() < 1e-2, "{v} vs {e}");
        }
        assert_eq!(r.eigen.clusters.len(), 3);
    }

    #[test]
    fn disk_eta_one_is_two() {
        let d = disc(&Domain::disk(1.0).unwrap(), 3);
        let r = bsteklov1_spectrum(&d, 3, &SolverOptions::default()).unwrap();
        assert!((r.value(1) - 2.0).abs() < 2e-2, "{}", r.value(1));
        assert!((r.value(2) - 4.0).abs() < 5e-2, "{}", r.value(2));
    }

    #[test]
    fn disk_xi_values() {
        let d = disc(&Domain::disk(1.0).unwrap(), 2);
        let r = bsteklov2_spectrum(&d, 5, &SolverOptions::default()).unwrap();
        assert!(r.value(1).abs() < 1e-12);
        assert!((r.value(2) - 4.0).abs() < 0.1, "{}", r.value(2));
        assert!((r.value(4) - 24.0).abs() < 1.0, "{}", r.value(4));
    }

    #[test]
    fn p1_rejected_for_plates() {
        let dom = Domain::square(1.0).unwrap();
        let d = Discretization::new(&dom, &dom.mesh(1).unwrap(), 1, 2).unwrap();
        assert!(matches!(buckling_spectrum(&d, 1, &SolverOptions::default()), Err(ProblemError::RequiresP2(_))));
    }
}
