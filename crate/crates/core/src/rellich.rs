//! Quadrature evaluation of the generalized Rellich identities, the
//! boundary formulas for buckling and clamped plate eigenvalues, and the
//! eigenvalue bounds that follow from sign conditions on a vector field.
//!
//! Everything is computed in the conformal chart `g = c^2 delta`:
//! `dv = c^2 dx`, `ds = c ds_e`, `<F, grad w> = F . grad_e w`,
//! `<F, nu> = c F . nu_e`, `d_nu w = grad_e w . nu_e / c`,
//! `<grad w, grad v> = c^-2 grad_e w . grad_e v` and
//! `DF(grad w, grad v) = c^-4 d_i w d_j v DF_ij` with `DF_ij` the covariant
//! components of the covariant derivative.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::constants;
use crate::fem::{ElementPoint, FeSpace};
use crate::geometry::{Domain, GeometryError, MetricModel, SUPPORT_SAMPLES_PER_EDGE};
use crate::mesh::Mesh;
use crate::eigen::SolverOptions;
use crate::problems::{self, Discretization, ProblemError, ProblemKind, SpectralResult};
use crate::quadrature::{self, QuadratureError};

#[derive(Debug, Error)]
pub enum RellichError {
    #[error("field {field} has no {what} evaluator")]
    MissingDerivative { field: String, what: &'static str },
    #[error("interior quadrature degree {0} is below 7")]
    LowQuadrature(usize),
    #[error("{0}")]
    Unsupported(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("expected a {expected} result, got {got}")]
    WrongProblem { expected: ProblemKind, got: ProblemKind },
    #[error("non-finite integrand")]
    NonFinite,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
}

/// Evaluation point; `element` is set whenever the point lies in a known mesh
/// triangle (always for interior points and polygonal boundary points).
#[derive(Debug, Clone, Copy)]
pub struct FieldPoint {
    pub x: [f64; 2],
    pub element: Option<ElementPoint>,
}

/// Scalar field with the derivatives the identities need. Gradients are chart
/// (Euclidean) gradients; `laplacian` is the Laplace-Beltrami operator of the
/// domain metric.
pub trait ScalarField: Sync {
    fn name(&self) -> &str;
    fn value(&self, p: &FieldPoint) -> f64;
    fn gradient(&self, p: &FieldPoint) -> [f64; 2];
    fn laplacian(&self, p: &FieldPoint) -> Option<f64>;
    /// Chart gradient of the Laplacian.
    fn laplacian_gradient(&self, p: &FieldPoint) -> Option<[f64; 2]>;
    fn bilaplacian(&self, _p: &FieldPoint) -> Option<f64> {
        None
    }
    /// Finite element fields can only be evaluated inside mesh triangles.
    fn needs_element(&self) -> bool {
        false
    }
}

type ScalarFn = Box<dyn Fn([f64; 2]) -> f64 + Send + Sync>;
type VectorFn = Box<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;
type TensorFn = Box<dyn Fn([f64; 2]) -> [[f64; 2]; 2] + Send + Sync>;

/// Closed-form field on a Euclidean domain.
pub struct AnalyticField {
    pub name: String,
    value: ScalarFn,
    gradient: VectorFn,
    laplacian: Option<ScalarFn>,
    laplacian_gradient: Option<VectorFn>,
    bilaplacian: Option<ScalarFn>,
}

impl AnalyticField {
    pub fn new(
        name: &str,
        value: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn([f64; 2]) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.to_string(),
            value: Box::new(value),
            gradient: Box::new(gradient),
            laplacian: None,
            laplacian_gradient: None,
            bilaplacian: None,
        }
    }

    pub fn with_laplacian(mut self, f: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Self {
        self.laplacian = Some(Box::new(f));
        self
    }

    pub fn with_laplacian_gradient(mut self, f: impl Fn([f64; 2]) -> [f64; 2] + Send + Sync + 'static) -> Self {
        self.laplacian_gradient = Some(Box::new(f));
        self
    }

    pub fn with_bilaplacian(mut self, f: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Self {
        self.bilaplacian = Some(Box::new(f));
        self
    }

    pub fn constant(c: f64) -> Self {
        Self::new("constant", move |_| c, |_| [0.0, 0.0])
            .with_laplacian(|_| 0.0)
            .with_laplacian_gradient(|_| [0.0, 0.0])
            .with_bilaplacian(|_| 0.0)
    }

    /// `a x + b y`.
    pub fn linear(a: f64, b: f64) -> Self {
        Self::new("linear", move |x| a * x[0] + b * x[1], move |_| [a, b])
            .with_laplacian(|_| 0.0)
            .with_laplacian_gradient(|_| [0.0, 0.0])
            .with_bilaplacian(|_| 0.0)
    }

    /// `sin(pi x) sin(pi y)`, a Dirichlet eigenfunction of the unit square
    /// with eigenvalue `2 pi^2`.
    pub fn sine_product() -> Self {
        let l = 2.0 * PI * PI;
        let v = |x: [f64; 2]| (PI * x[0]).sin() * (PI * x[1]).sin();
        let g = |x: [f64; 2]| [PI * (PI * x[0]).cos() * (PI * x[1]).sin(), PI * (PI * x[0]).sin() * (PI * x[1]).cos()];
        Self::new("sin(pi x) sin(pi y)", v, g)
            .with_laplacian(move |x| -l * v(x))
            .with_laplacian_gradient(move |x| {
                let d = g(x);
                [-l * d[0], -l * d[1]]
            })
            .with_bilaplacian(move |x| l * l * v(x))
    }

    /// Harmonic `x^2 - y^2`.
    pub fn saddle() -> Self {
        Self::new("x^2 - y^2", |x| x[0] * x[0] - x[1] * x[1], |x| [2.0 * x[0], -2.0 * x[1]])
            .with_laplacian(|_| 0.0)
            .with_laplacian_gradient(|_| [0.0, 0.0])
            .with_bilaplacian(|_| 0.0)
    }

    /// Biharmonic `x^4 - 3 x^2 y^2`.
    pub fn quartic() -> Self {
        Self::new(
            "x^4 - 3x^2 y^2",
            |x| x[0].powi(4) - 3.0 * x[0] * x[0] * x[1] * x[1],
            |x| [4.0 * x[0].powi(3) - 6.0 * x[0] * x[1] * x[1], -6.0 * x[0] * x[0] * x[1]],
        )
        .with_laplacian(|x| 6.0 * x[0] * x[0] - 6.0 * x[1] * x[1])
        .with_laplacian_gradient(|x| [12.0 * x[0], -12.0 * x[1]])
        .with_bilaplacian(|_| 0.0)
    }
}

impl ScalarField for AnalyticField {
    fn name(&self) -> &str {
        &self.name
    }
    fn value(&self, p: &FieldPoint) -> f64 {
        (self.value)(p.x)
    }
    fn gradient(&self, p: &FieldPoint) -> [f64; 2] {
        (self.gradient)(p.x)
    }
    fn laplacian(&self, p: &FieldPoint) -> Option<f64> {
        self.laplacian.as_ref().map(|f| f(p.x))
    }
    fn laplacian_gradient(&self, p: &FieldPoint) -> Option<[f64; 2]> {
        self.laplacian_gradient.as_ref().map(|f| f(p.x))
    }
    fn bilaplacian(&self, p: &FieldPoint) -> Option<f64> {
        self.bilaplacian.as_ref().map(|f| f(p.x))
    }
}

/// Finite element function. With a mixed Laplacian vector (as produced by
/// the biharmonic solvers) the Laplacian and its gradient come from that
/// vector; otherwise the elementwise Laplacian of the P2 function is used.
pub struct FemField<'a> {
    pub name: String,
    pub space: &'a FeSpace,
    pub metric: MetricModel,
    pub u: &'a [f64],
    pub laplacian: Option<&'a [f64]>,
}

impl<'a> FemField<'a> {
    pub fn new(name: &str, space: &'a FeSpace, metric: MetricModel, u: &'a [f64]) -> Self {
        Self { name: name.to_string(), space, metric, u, laplacian: None }
    }

    pub fn with_laplacian(mut self, lap: &'a [f64]) -> Self {
        self.laplacian = Some(lap);
        self
    }

    fn element(&self, p: &FieldPoint) -> ElementPoint {
        p.element.expect("finite element fields are evaluated inside mesh triangles")
    }
}

impl ScalarField for FemField<'_> {
    fn name(&self) -> &str {
        &self.name
    }
    fn value(&self, p: &FieldPoint) -> f64 {
        self.space.value(self.u, self.element(p))
    }
    fn gradient(&self, p: &FieldPoint) -> [f64; 2] {
        self.space.gradient(self.u, self.element(p))
    }
    fn laplacian(&self, p: &FieldPoint) -> Option<f64> {
        let e = self.element(p);
        Some(match self.laplacian {
            Some(l) => self.space.value(l, e),
            None => {
                let c = self.metric.conformal_factor(p.x);
                self.space.element_laplacian(self.u, e.element) / (c * c)
            }
        })
    }
    fn laplacian_gradient(&self, p: &FieldPoint) -> Option<[f64; 2]> {
        self.laplacian.map(|l| self.space.gradient(l, self.element(p)))
    }
    fn needs_element(&self) -> bool {
        true
    }
}

/// Vector field given by chart components `F^i`, with an optional analytic
/// covariant derivative `DF_ij` and divergence. Missing derivatives fall back
/// to central differences.
pub struct VectorField {
    pub name: String,
    pub metric: MetricModel,
    value: VectorFn,
    covariant: Option<TensorFn>,
    divergence: Option<ScalarFn>,
    /// Central-difference step of the fallback derivative.
    pub fd_step: f64,
}

impl VectorField {
    pub fn new(name: &str, metric: MetricModel, value: impl Fn([f64; 2]) -> [f64; 2] + Send + Sync + 'static) -> Self {
        Self { name: name.to_string(), metric, value: Box::new(value), covariant: None, divergence: None, fd_step: 1e-5 }
    }

    pub fn with_covariant(mut self, f: impl Fn([f64; 2]) -> [[f64; 2]; 2] + Send + Sync + 'static) -> Self {
        self.covariant = Some(Box::new(f));
        self
    }

    pub fn with_divergence(mut self, f: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Self {
        self.divergence = Some(Box::new(f));
        self
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    /// `F(x) = x - center` in the Euclidean plane: `DF = g`, `div F = 2`.
    pub fn position(center: [f64; 2]) -> Self {
        Self::new("x - p", MetricModel::euclidean(), move |x| [x[0] - center[0], x[1] - center[1]])
            .with_covariant(|_| [[1.0, 0.0], [0.0, 1.0]])
            .with_divergence(|_| 2.0)
    }

    /// `F = grad rho_p` for the domain's base point and metric. In constant
    /// curvature `DF = Hess rho_p` has eigenvalue 1 radially and `d H(d)`
    /// tangentially, and `div F = 1 + d H(d)`.
    pub fn grad_rho(domain: &Domain) -> Self {
        let m = domain.metric;
        let p = domain.base_point;
        let kappa = m.kappa;
        let scale = domain_scale(domain);
        Self::new("grad rho_p", m, move |x| m.grad_rho(p, x))
            .with_covariant(move |x| {
                let d = m.distance(p, x).unwrap_or(f64::NAN);
                let c = m.conformal_factor(x);
                let tangential = constants::r_h(2, kappa, d);
                let g = m.distance_gradient(p, x);
                let gl = g[0].hypot(g[1]);
                if gl == 0.0 {
                    return [[c * c, 0.0], [0.0, c * c]];
                }
                let r = [g[0] / gl, g[1] / gl];
                let t = [-r[1], r[0]];
                let mut out = [[0.0; 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        out[i][j] = c * c * (r[i] * r[j] + tangential * t[i] * t[j]);
                    }
                }
                out
            })
            .with_divergence(move |x| 1.0 + constants::r_h(2, kappa, m.distance(p, x).unwrap_or(f64::NAN)))
            .with_fd_step(1e-5 * scale)
    }

    pub fn at(&self, x: [f64; 2]) -> [f64; 2] {
        (self.value)(x)
    }

    pub fn has_analytic_covariant(&self) -> bool {
        self.covariant.is_some()
    }

    /// `DF_ij`, analytic if available.
    pub fn covariant_at(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        match &self.covariant {
            Some(f) => f(x),
            None => self.covariant_fd(x),
        }
    }

    /// `DF_ij = c^2 (d_i F^j + Gamma^j_il F^l)` by central differences, with
    /// the conformal Christoffel symbols of `phi = ln c`.
    pub fn covariant_fd(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let h = self.fd_step;
        let f = self.at(x);
        let c = self.metric.conformal_factor(x);
        let gphi = self.metric.grad_log_conformal(x);
        let fdotphi = f[0] * gphi[0] + f[1] * gphi[1];
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let (fp, fm) = (self.at(xp), self.at(xm));
            for j in 0..2 {
                let dfij = (fp[j] - fm[j]) / (2.0 * h);
                let delta = if i == j { 1.0 } else { 0.0 };
                let gamma = delta * fdotphi + f[j] * gphi[i] - f[i] * gphi[j];
                out[i][j] = c * c * (dfij + gamma);
            }
        }
        out
    }

    /// `div F = c^-2 tr DF`, analytic if available.
    pub fn divergence_at(&self, x: [f64; 2]) -> f64 {
        match &self.divergence {
            Some(f) => f(x),
            None => {
                let d = self.covariant_at(x);
                let c = self.metric.conformal_factor(x);
                (d[0][0] + d[1][1]) / (c * c)
            }
        }
    }
}

fn domain_scale(domain: &Domain) -> f64 {
    use crate::geometry::Boundary;
    match &domain.boundary {
        Boundary::Circle { radius, .. } => *radius,
        Boundary::Ellipse { a, b, .. } => a.max(*b),
        Boundary::Rectangle { width, height, .. } => width.max(*height),
        Boundary::Polygon { vertices } => {
            let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for v in vertices {
                for k in 0..2 {
                    lo[k] = lo[k].min(v[k]);
                    hi[k] = hi[k].max(v[k]);
                }
            }
            (hi[0] - lo[0]).max(hi[1] - lo[1])
        }
    }
}

fn sym(d: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let o = 0.5 * (d[0][1] + d[1][0]);
    [[d[0][0], o], [o, d[1][1]]]
}

fn bilinear(s: &[[f64; 2]; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * (s[0][0] * b[0] + s[0][1] * b[1]) + a[1] * (s[1][0] * b[0] + s[1][1] * b[1])
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuadratureOptions {
    pub interior_degree: usize,
    pub boundary_degree: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { interior_degree: 7, boundary_degree: 9 }
    }
}

/// Interior quadrature point with `dv_g` weight.
#[derive(Debug, Clone, Copy)]
pub struct InteriorSample {
    pub point: FieldPoint,
    pub c: f64,
    pub dv: f64,
}

/// Boundary quadrature point with outward chart unit normal and `ds_g` weight.
#[derive(Debug, Clone, Copy)]
pub struct BoundarySample {
    pub point: FieldPoint,
    pub normal: [f64; 2],
    pub c: f64,
    pub ds: f64,
}

const CHUNK: usize = 256;

/// Integrates `N` interior and boundary integrands at once. Interior sums run
/// in fixed chunks and are reduced in order, so the result is deterministic.
/// With `exact_curve`, a curved boundary is integrated along the exact curve
/// between the parameters of each boundary edge's endpoints.
pub fn integrate<const N: usize>(
    domain: &Domain,
    mesh: &Mesh,
    q: &QuadratureOptions,
    exact_curve: bool,
    interior: &(dyn Fn(&InteriorSample) -> [f64; N] + Sync),
    boundary: &(dyn Fn(&BoundarySample) -> [f64; N] + Sync),
) -> Result<[f64; N], RellichError> {
    let rule = quadrature::triangle_rule(q.interior_degree)?;
    let edge = quadrature::edge_rule(q.boundary_degree)?;
    let metric = domain.metric;
    let idx: Vec<usize> = (0..mesh.triangles.len()).collect();
    let partial: Vec<[f64; N]> = idx
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = [0.0; N];
            for &t in chunk {
                let tri = mesh.triangles[t];
                let v = [mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]];
                let area = mesh.area(t);
                for (bc, w) in rule.points.iter().zip(&rule.weights) {
                    let x = [
                        bc[0] * v[0][0] + bc[1] * v[1][0] + bc[2] * v[2][0],
                        bc[0] * v[0][1] + bc[1] * v[1][1] + bc[2] * v[2][1],
                    ];
                    let c = metric.conformal_factor(x);
                    let s = InteriorSample {
                        point: FieldPoint { x, element: Some(ElementPoint { element: t, bary: *bc }) },
                        c,
                        dv: w * area * c * c,
                    };
                    let vals = interior(&s);
                    for k in 0..N {
                        acc[k] += vals[k];
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = [0.0; N];
    for p in partial {
        for k in 0..N {
            total[k] += p[k];
        }
    }
    let curved = exact_curve && domain.boundary.is_curved();
    for be in &mesh.boundary_edges {
        let (a, b) = (mesh.vertices[be.v[0]], mesh.vertices[be.v[1]]);
        if curved {
            let t0 = domain.boundary.param_of(a).expect("curved boundary");
            let mut t1 = domain.boundary.param_of(b).expect("curved boundary");
            if t1 <= t0 {
                t1 += 2.0 * PI;
            }
            for (s, w) in edge.points.iter().zip(&edge.weights) {
                let cp = domain.boundary.curve_point(t0 + s * (t1 - t0)).expect("curved boundary");
                let c = metric.conformal_factor(cp.x);
                let sample = BoundarySample {
                    point: FieldPoint { x: cp.x, element: None },
                    normal: cp.normal,
                    c,
                    ds: w * (t1 - t0) * cp.speed * c,
                };
                let vals = boundary(&sample);
                for k in 0..N {
                    total[k] += vals[k];
                }
            }
        } else {
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            for (s, w) in edge.points.iter().zip(&edge.weights) {
                let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                let mut l = [0.0; 3];
                l[be.local] = 1.0 - s;
                l[(be.local + 1) % 3] = *s;
                let c = metric.conformal_factor(x);
                let sample = BoundarySample {
                    point: FieldPoint { x, element: Some(ElementPoint { element: be.triangle, bary: l }) },
                    normal: be.normal,
                    c,
                    ds: w * len * c,
                };
                let vals = boundary(&sample);
                for k in 0..N {
                    total[k] += vals[k];
                }
            }
        }
    }
    if total.iter().any(|v| !v.is_finite()) {
        return Err(RellichError::NonFinite);
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub identity: &'static str,
    pub lhs: f64,
    /// False when the left side is taken as zero from the eigenvalue
    /// equation because the field has no fourth-derivative evaluator.
    pub lhs_by_quadrature: bool,
    pub rhs_terms: BTreeMap<&'static str, f64>,
    pub residual: f64,
    /// `residual / sum |rhs term|` (zero when every term vanishes).
    pub relative_residual: f64,
}

impl IdentityResidual {
    fn new(identity: &'static str, lhs: f64, lhs_by_quadrature: bool, keys: &[&'static str], values: &[f64]) -> Self {
        let rhs_terms: BTreeMap<&'static str, f64> = keys.iter().copied().zip(values.iter().copied()).collect();
        // fixed summation order: the order of the printed terms
        let sum: f64 = values.iter().sum();
        let scale: f64 = values.iter().map(|v| v.abs()).sum();
        let residual = (lhs - sum).abs();
        let relative_residual = if scale > 0.0 { residual / scale } else { residual };
        Self { identity, lhs, lhs_by_quadrature, rhs_terms, residual, relative_residual }
    }
}

/// Terms of the first-order identity, in printed order.
pub const RELLICH_TERMS: [&str; 6] = [
    "boundary_normal_flux",
    "boundary_gradient_energy",
    "boundary_lambda_mass",
    "interior_div_energy",
    "interior_deformation",
    "interior_lambda_div_mass",
];

/// Terms of the polarized identity; the braced boundary pair is one term.
pub const POLARIZED_TERMS: [&str; 4] =
    ["boundary_normal_flux", "boundary_gradient_product", "interior_div_product", "interior_deformation"];

/// Terms of the higher-order identity; the braced boundary pair is one term.
pub const RELLICH2_TERMS: [&str; 10] = [
    "interior_div_laplacian_sq",
    "boundary_laplacian_sq_flux",
    "boundary_normal_flux",
    "boundary_gradient_product",
    "interior_div_product",
    "interior_deformation_product",
    "boundary_lambda_normal_flux",
    "boundary_lambda_gradient_energy",
    "interior_lambda_div_energy",
    "interior_lambda_deformation",
];

fn probe_point(mesh: &Mesh) -> FieldPoint {
    let t = mesh.triangles[0];
    let v = [mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]];
    let x = [(v[0][0] + v[1][0] + v[2][0]) / 3.0, (v[0][1] + v[1][1] + v[2][1]) / 3.0];
    FieldPoint { x, element: Some(ElementPoint { element: 0, bary: [1.0 / 3.0; 3] }) }
}

fn require_laplacian(w: &dyn ScalarField, mesh: &Mesh) -> Result<(), RellichError> {
    if w.laplacian(&probe_point(mesh)).is_none() {
        return Err(RellichError::MissingDerivative { field: w.name().to_string(), what: "Laplacian" });
    }
    Ok(())
}

fn check_degree(q: &QuadratureOptions) -> Result<(), RellichError> {
    if q.interior_degree < 7 {
        return Err(RellichError::LowQuadrature(q.interior_degree));
    }
    Ok(())
}

fn exact_curve(fields: &[&dyn ScalarField]) -> bool {
    fields.iter().all(|f| !f.needs_element())
}

/// First-order identity: `int (Delta w + lambda w) <F, grad w>` against its
/// six right-hand terms (`RELLICH_TERMS`).
pub fn rellich_residual(
    domain: &Domain,
    mesh: &Mesh,
    w: &dyn ScalarField,
    f: &VectorField,
    lambda: f64,
    q: &QuadratureOptions,
) -> Result<IdentityResidual, RellichError> {
    check_degree(q)?;
    require_laplacian(w, mesh)?;
    let vals = integrate::<7>(
        domain,
        mesh,
        q,
        exact_curve(&[w]),
        &|s| {
            let p = &s.point;
            let (wv, gw) = (w.value(p), w.gradient(p));
            let lap = w.laplacian(p).unwrap_or(f64::NAN);
            let fx = f.at(p.x);
            let div = f.divergence_at(p.x);
            let df = sym(f.covariant_at(p.x));
            let c2 = s.c * s.c;
            let grad2 = dot(gw, gw) / c2;
            [
                (lap + lambda * wv) * dot(fx, gw) * s.dv,
                0.0,
                0.0,
                0.0,
                0.5 * div * grad2 * s.dv,
                -bilinear(&df, gw, gw) / (c2 * c2) * s.dv,
                -0.5 * lambda * wv * wv * div * s.dv,
            ]
        },
        &|s| {
            let p = &s.point;
            let (wv, gw) = (w.value(p), w.gradient(p));
            let fx = f.at(p.x);
            let dn = dot(gw, s.normal) / s.c;
            let fnu = s.c * dot(fx, s.normal);
            let grad2 = dot(gw, gw) / (s.c * s.c);
            [
                0.0,
                dn * dot(fx, gw) * s.ds,
                -0.5 * grad2 * fnu * s.ds,
                0.5 * lambda * wv * wv * fnu * s.ds,
                0.0,
                0.0,
                0.0,
            ]
        },
    )?;
    Ok(IdentityResidual::new("rellich", vals[0], true, &RELLICH_TERMS, &vals[1..]))
}

/// Polarized identity for the pair `(w, v)` at `lambda = 0`.
pub fn polarized_residual(
    domain: &Domain,
    mesh: &Mesh,
    w: &dyn ScalarField,
    v: &dyn ScalarField,
    f: &VectorField,
    q: &QuadratureOptions,
) -> Result<IdentityResidual, RellichError> {
    check_degree(q)?;
    require_laplacian(w, mesh)?;
    require_laplacian(v, mesh)?;
    let vals = integrate::<5>(
        domain,
        mesh,
        q,
        exact_curve(&[w, v]),
        &|s| {
            let p = &s.point;
            let (gw, gv) = (w.gradient(p), v.gradient(p));
            let (lw, lv) = (w.laplacian(p).unwrap_or(f64::NAN), v.laplacian(p).unwrap_or(f64::NAN));
            let fx = f.at(p.x);
            let df = sym(f.covariant_at(p.x));
            let c2 = s.c * s.c;
            [
                (lw * dot(fx, gv) + lv * dot(fx, gw)) * s.dv,
                0.0,
                0.0,
                f.divergence_at(p.x) * dot(gw, gv) / c2 * s.dv,
                -2.0 * bilinear(&df, gw, gv) / (c2 * c2) * s.dv,
            ]
        },
        &|s| {
            let p = &s.point;
            let (gw, gv) = (w.gradient(p), v.gradient(p));
            let fx = f.at(p.x);
            let (dnw, dnv) = (dot(gw, s.normal) / s.c, dot(gv, s.normal) / s.c);
            let fnu = s.c * dot(fx, s.normal);
            [
                0.0,
                (dnw * dot(fx, gv) + dnv * dot(fx, gw)) * s.ds,
                -dot(gw, gv) / (s.c * s.c) * fnu * s.ds,
                0.0,
                0.0,
            ]
        },
    )?;
    Ok(IdentityResidual::new("polarized", vals[0], true, &POLARIZED_TERMS, &vals[1..]))
}

/// Higher-order identity: `int (Delta^2 w + lambda Delta w) <F, grad w>`
/// against `RELLICH2_TERMS`. Without a bilaplacian evaluator the left side is
/// taken as zero, which is exact for eigenfunctions of the buckling problem
/// with `lambda` its eigenvalue.
pub fn rellich2_residual(
    domain: &Domain,
    mesh: &Mesh,
    w: &dyn ScalarField,
    f: &VectorField,
    lambda: f64,
    q: &QuadratureOptions,
) -> Result<IdentityResidual, RellichError> {
    check_degree(q)?;
    require_laplacian(w, mesh)?;
    let probe = probe_point(mesh);
    if w.laplacian_gradient(&probe).is_none() {
        return Err(RellichError::MissingDerivative { field: w.name().to_string(), what: "Laplacian gradient" });
    }
    let by_quadrature = w.bilaplacian(&probe).is_some();
    let vals = integrate::<11>(
        domain,
        mesh,
        q,
        exact_curve(&[w]),
        &|s| {
            let p = &s.point;
            let gw = w.gradient(p);
            let lap = w.laplacian(p).unwrap_or(f64::NAN);
            let glap = w.laplacian_gradient(p).unwrap_or([f64::NAN; 2]);
            let fx = f.at(p.x);
            let div = f.divergence_at(p.x);
            let df = sym(f.covariant_at(p.x));
            let c2 = s.c * s.c;
            let lhs = if by_quadrature {
                (w.bilaplacian(p).unwrap_or(f64::NAN) + lambda * lap) * dot(fx, gw) * s.dv
            } else {
                0.0
            };
            [
                lhs,
                0.5 * div * lap * lap * s.dv,
                0.0,
                0.0,
                0.0,
                div * dot(gw, glap) / c2 * s.dv,
                -2.0 * bilinear(&df, gw, glap) / (c2 * c2) * s.dv,
                0.0,
                0.0,
                0.5 * lambda * div * dot(gw, gw) / c2 * s.dv,
                -lambda * bilinear(&df, gw, gw) / (c2 * c2) * s.dv,
            ]
        },
        &|s| {
            let p = &s.point;
            let gw = w.gradient(p);
            let lap = w.laplacian(p).unwrap_or(f64::NAN);
            let glap = w.laplacian_gradient(p).unwrap_or([f64::NAN; 2]);
            let fx = f.at(p.x);
            let fnu = s.c * dot(fx, s.normal);
            let (dnw, dnlap) = (dot(gw, s.normal) / s.c, dot(glap, s.normal) / s.c);
            let c2 = s.c * s.c;
            [
                0.0,
                0.0,
                -0.5 * lap * lap * fnu * s.ds,
                (dnw * dot(fx, glap) + dnlap * dot(fx, gw)) * s.ds,
                -dot(gw, glap) / c2 * fnu * s.ds,
                0.0,
                0.0,
                lambda * dnw * dot(fx, gw) * s.ds,
                -0.5 * lambda * dot(gw, gw) / c2 * fnu * s.ds,
                0.0,
                0.0,
            ]
        },
    )?;
    Ok(IdentityResidual::new("rellich2", vals[0], by_quadrature, &RELLICH2_TERMS, &vals[1..]))
}

/// For a Dirichlet eigenpair `(lambda, u)` and `F = grad rho_p` the
/// first-order identity reduces to
/// `int <grad rho_p, nu> (d_nu u)^2 = lambda int u^2 Delta rho_p
///  - int Delta rho_p |grad u|^2 + 2 int Hess rho_p (grad u, grad u)`.
/// The left side is the boundary integral.
pub fn support_flux_identity(
    domain: &Domain,
    mesh: &Mesh,
    u: &dyn ScalarField,
    lambda: f64,
    q: &QuadratureOptions,
) -> Result<IdentityResidual, RellichError> {
    check_degree(q)?;
    let f = VectorField::grad_rho(domain);
    let vals = integrate::<4>(
        domain,
        mesh,
        q,
        exact_curve(&[u]),
        &|s| {
            let p = &s.point;
            let (uv, gu) = (u.value(p), u.gradient(p));
            let div = f.divergence_at(p.x);
            let df = sym(f.covariant_at(p.x));
            let c2 = s.c * s.c;
            [
                0.0,
                lambda * uv * uv * div * s.dv,
                -div * dot(gu, gu) / c2 * s.dv,
                2.0 * bilinear(&df, gu, gu) / (c2 * c2) * s.dv,
            ]
        },
        &|s| {
            let p = &s.point;
            let dn = dot(u.gradient(p), s.normal) / s.c;
            [s.c * dot(f.at(p.x), s.normal) * dn * dn * s.ds, 0.0, 0.0, 0.0]
        },
    )?;
    Ok(IdentityResidual::new(
        "support_flux",
        vals[0],
        true,
        &["interior_lambda_mass", "interior_energy", "interior_hessian"],
        &vals[1..],
    ))
}

/// Sampled extrema behind the field conditions `0 < c1 <= div F <= c2`, `DF(X,X) >= alpha |X|^2`, `<F, nu> >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldConditionReport {
    pub c1_div: f64,
    pub c2_div: f64,
    /// Smallest eigenvalue of `sym DF` relative to `g` over the probes.
    pub alpha: f64,
    pub boundary_min: f64,
    pub probe_count: usize,
}

impl FieldConditionReport {
    /// The field conditions hold on the probe set.
    pub fn satisfied(&self) -> bool {
        self.c1_div > 0.0 && self.alpha > 0.0 && self.boundary_min >= 0.0
    }

    /// `div F` is constant on the probe set (to `1e-8` relative).
    pub fn constant_divergence(&self) -> bool {
        (self.c2_div - self.c1_div).abs() <= 1e-8 * self.c2_div.abs().max(1.0)
    }
}

/// Probes: interior quadrature points, boundary edge quadrature points, and
/// for `<F, nu>` the same boundary samples as the support-function extrema.
pub fn field_conditions(domain: &Domain, mesh: &Mesh, f: &VectorField, q: &QuadratureOptions) -> Result<FieldConditionReport, RellichError> {
    let rule = quadrature::triangle_rule(q.interior_degree)?;
    let edge = quadrature::edge_rule(q.boundary_degree)?;
    let m = &domain.metric;
    let mut probes: Vec<[f64; 2]> = Vec::new();
    for tri in &mesh.triangles {
        let v = [mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]];
        for bc in &rule.points {
            probes.push([
                bc[0] * v[0][0] + bc[1] * v[1][0] + bc[2] * v[2][0],
                bc[0] * v[0][1] + bc[1] * v[1][1] + bc[2] * v[2][1],
            ]);
        }
    }
    let mut boundary_min = f64::INFINITY;
    for be in &mesh.boundary_edges {
        let (a, b) = (mesh.vertices[be.v[0]], mesh.vertices[be.v[1]]);
        let at = |t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
        for t in &edge.points {
            probes.push(at(*t));
        }
        let n = SUPPORT_SAMPLES_PER_EDGE;
        let samples = std::iter::once(0.0).chain((0..n).map(|i| (i as f64 + 0.5) / n as f64)).chain(std::iter::once(1.0));
        for t in samples {
            let x = at(t);
            boundary_min = boundary_min.min(m.conformal_factor(x) * dot(f.at(x), be.normal));
        }
    }
    let (mut c1, mut c2, mut alpha) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY);
    for &x in &probes {
        let div = f.divergence_at(x);
        c1 = c1.min(div);
        c2 = c2.max(div);
        let c = m.conformal_factor(x);
        let s = sym(f.covariant_at(x));
        let (a, d, o) = (s[0][0] / (c * c), s[1][1] / (c * c), s[0][1] / (c * c));
        let lmin = 0.5 * (a + d) - (0.25 * (a - d) * (a - d) + o * o).sqrt();
        alpha = alpha.min(lmin);
    }
    if !(c1.is_finite() && c2.is_finite() && alpha.is_finite() && boundary_min.is_finite()) {
        return Err(RellichError::NonFinite);
    }
    Ok(FieldConditionReport { c1_div: c1, c2_div: c2, alpha, boundary_min, probe_count: probes.len() })
}

/// One eigenpair's eigenvalue recovered from a boundary integral.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryFormula {
    /// One-based eigenvalue index.
    pub index: usize,
    pub from_formula: f64,
    pub from_solver: f64,
    pub ratio: f64,
}

fn boundary_formula(disc: &Discretization, result: &SpectralResult, expected: ProblemKind) -> Result<Vec<BoundaryFormula>, RellichError> {
    if result.kind != expected {
        return Err(RellichError::WrongProblem { expected, got: result.kind });
    }
    let domain = &disc.domain;
    if !domain.metric.is_euclidean() {
        return Err(RellichError::Unsupported("boundary formulas hold only for Euclidean domains".into()));
    }
    if !domain.boundary.contains([0.0, 0.0]) {
        return Err(RellichError::Precondition("the origin must lie inside the domain".into()));
    }
    let mesh = &disc.space.mesh;
    if mesh.boundary_edges.iter().any(|e| dot(mesh.vertices[e.v[0]], e.normal) <= 0.0 || dot(mesh.vertices[e.v[1]], e.normal) <= 0.0) {
        return Err(RellichError::Precondition("domain is not star-shaped with respect to the origin".into()));
    }
    let edge = quadrature::edge_rule(9)?;
    let space = &disc.space;
    let mut out = Vec::with_capacity(result.values().len());
    for (i, (u, lap)) in result.eigen.vectors.iter().zip(&result.laplacians).enumerate() {
        // int (d_nn u)^2 d_nu(r^2) ds with d_nn u = Delta u on the clamped boundary
        let mut flux = 0.0;
        for (e, be) in mesh.boundary_edges.iter().enumerate() {
            let (a, b) = (mesh.vertices[be.v[0]], mesh.vertices[be.v[1]]);
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            for (t, w) in edge.points.iter().zip(&edge.weights) {
                let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                let (tri, l) = space.edge_bary(e, *t);
                let d = space.value(lap, ElementPoint { element: tri, bary: l });
                flux += w * len * d * d * 2.0 * dot(x, be.normal);
            }
        }
        let from_formula = match expected {
            ProblemKind::Buckling => flux / (4.0 * disc.forms.stiffness.quad_form(u)),
            _ => flux / (8.0 * disc.forms.mass.quad_form(u)),
        };
        let from_solver = result.eigen.values[i];
        out.push(BoundaryFormula { index: i + 1, from_formula, from_solver, ratio: from_formula / from_solver });
    }
    Ok(out)
}

/// `Lambda = int (d_nn u)^2 d_nu(r^2) ds / (4 int |grad u|^2)`.
pub fn boundary_formula_buckling(disc: &Discretization, result: &SpectralResult) -> Result<Vec<BoundaryFormula>, RellichError> {
    boundary_formula(disc, result, ProblemKind::Buckling)
}

/// `Gamma^2 = int (d_nn u)^2 d_nu(r^2) ds / (8 int u^2)`: the quotient
/// recovers the clamped plate eigenvalue `Gamma^2` of `Delta^2 u = Gamma^2 u`.
pub fn boundary_formula_clamped(disc: &Discretization, result: &SpectralResult) -> Result<Vec<BoundaryFormula>, RellichError> {
    boundary_formula(disc, result, ProblemKind::Clamped)
}

/// One side-by-side comparison of an eigenvalue with its bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundComparison {
    pub index: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum BoundOutcome {
    Evaluated(Vec<BoundComparison>),
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldBoundReport {
    pub conditions: FieldConditionReport,
    /// `lambda <= int (d_nu w)^2 <F, nu> / ((2 alpha + c1 - c2) int w^2)`.
    pub dirichlet_upper: BoundOutcome,
    /// `int (Delta w)^2 <F, nu> / (2 alpha int |grad w|^2) <= Lambda`, needs `c1 = c2`.
    pub buckling_lower: BoundOutcome,
}

/// Evaluates both sides of the two eigenvalue bounds for every supplied
/// eigenpair. Verdicts with slack are left to the caller.
pub fn field_bound_check(
    disc: &Discretization,
    f: &VectorField,
    dirichlet: &SpectralResult,
    buckling: &SpectralResult,
    q: &QuadratureOptions,
) -> Result<FieldBoundReport, RellichError> {
    if dirichlet.kind != ProblemKind::Dirichlet {
        return Err(RellichError::WrongProblem { expected: ProblemKind::Dirichlet, got: dirichlet.kind });
    }
    if buckling.kind != ProblemKind::Buckling {
        return Err(RellichError::WrongProblem { expected: ProblemKind::Buckling, got: buckling.kind });
    }
    let domain = &disc.domain;
    let mesh = &disc.space.mesh;
    let cond = field_conditions(domain, mesh, f, q)?;
    let failed = |what: &str| {
        BoundOutcome::Skipped(format!(
            "{what} (c1 = {:.6e}, alpha = {:.6e}, min <F,nu> = {:.6e})",
            cond.c1_div, cond.alpha, cond.boundary_min
        ))
    };
    if !cond.satisfied() {
        let reason = failed("field conditions fail");
        return Ok(FieldBoundReport { conditions: cond, dirichlet_upper: reason.clone(), buckling_lower: reason });
    }
    let space = &disc.space;
    let metric = domain.metric;
    let edge = quadrature::edge_rule(q.boundary_degree)?;
    let boundary_integral = |integrand: &dyn Fn(ElementPoint, [f64; 2], [f64; 2], f64) -> f64| -> f64 {
        let mut acc = 0.0;
        for (e, be) in mesh.boundary_edges.iter().enumerate() {
            let (a, b) = (mesh.vertices[be.v[0]], mesh.vertices[be.v[1]]);
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            for (t, w) in edge.points.iter().zip(&edge.weights) {
                let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                let (tri, l) = space.edge_bary(e, *t);
                let c = metric.conformal_factor(x);
                acc += w * len * c * integrand(ElementPoint { element: tri, bary: l }, x, be.normal, c);
            }
        }
        acc
    };

    let denom = 2.0 * cond.alpha + cond.c1_div - cond.c2_div;
    let dirichlet_upper = if denom <= 0.0 {
        failed(&format!("2 alpha + c1 - c2 = {denom:.6e} is not positive"))
    } else {
        let rows = dirichlet
            .eigen
            .vectors
            .iter()
            .zip(&dirichlet.eigen.values)
            .enumerate()
            .map(|(i, (u, &lam))| {
                let flux = boundary_integral(&|ep, x, n, c| {
                    let dn = dot(space.gradient(u, ep), n) / c;
                    dn * dn * c * dot(f.at(x), n)
                });
                BoundComparison { index: i + 1, lhs: lam, rhs: flux / (denom * disc.forms.mass.quad_form(u)) }
            })
            .collect();
        BoundOutcome::Evaluated(rows)
    };
    let buckling_lower = if !cond.constant_divergence() {
        BoundOutcome::Skipped(format!("div F is not constant (c1 = {:.6e}, c2 = {:.6e})", cond.c1_div, cond.c2_div))
    } else {
        let rows = buckling
            .eigen
            .vectors
            .iter()
            .zip(&buckling.laplacians)
            .zip(&buckling.eigen.values)
            .enumerate()
            .map(|(i, ((u, lap), &big))| {
                let flux = boundary_integral(&|ep, x, n, c| {
                    let d = space.value(lap, ep);
                    d * d * c * dot(f.at(x), n)
                });
                BoundComparison { index: i + 1, lhs: flux / (2.0 * cond.alpha * disc.forms.stiffness.quad_form(u)), rhs: big }
            })
            .collect();
        BoundOutcome::Evaluated(rows)
    };
    Ok(FieldBoundReport { conditions: cond, dirichlet_upper, buckling_lower })
}

/// `[0, 1]^2` with the base point at its center.
pub fn unit_square() -> Domain {
    Domain::new(
        "unit-square",
        MetricModel::euclidean(),
        crate::geometry::Boundary::Rectangle { origin: [0.0, 0.0], width: 1.0, height: 1.0 },
        [0.5, 0.5],
    )
    .expect("valid rectangle")
}

/// Built-in `(w, F, lambda)` combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// `w = 1`, `F = x`, `lambda = 0` on the unit disk.
    ConstantDisk,
    /// `w = sin(pi x) sin(pi y)`, `F = x - (1/2, 1/2)`, `lambda = 2 pi^2` on `[0,1]^2`.
    SineSquare,
    /// `w = x^2 - y^2`, `F = x`, `lambda = 0` on the unit disk. The interior
    /// terms cancel pointwise, so the residual is at roundoff on every mesh.
    SaddleDisk,
    /// As `SaddleDisk` with `lambda = 1`; the `lambda` terms expose the
    /// polygon-versus-curve mismatch, which decays like `h^2`.
    SaddleDiskLambda,
    /// Polarized identity for `w = x`, `v = y`, `F = x` on `[0,1]^2`.
    LinearPairSquare,
    /// Higher-order identity for `w = x^4 - 3x^2 y^2`, `F = x - (1/2, 1/2)`, `lambda = 0` on `[0,1]^2`.
    QuarticSquare,
    /// Higher-order identity for the first buckling eigenfunction of the
    /// unit disk with `F = x` and `lambda = Lambda_1`.
    BucklingDisk,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::ConstantDisk,
        Scenario::SineSquare,
        Scenario::SaddleDisk,
        Scenario::SaddleDiskLambda,
        Scenario::LinearPairSquare,
        Scenario::QuarticSquare,
        Scenario::BucklingDisk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::ConstantDisk => "constant-disk",
            Scenario::SineSquare => "sine-square",
            Scenario::SaddleDisk => "saddle-disk",
            Scenario::SaddleDiskLambda => "saddle-disk-lambda",
            Scenario::LinearPairSquare => "linear-pair-square",
            Scenario::QuarticSquare => "quartic-square",
            Scenario::BucklingDisk => "buckling-disk",
        }
    }

    pub fn parse(s: &str) -> Result<Self, RellichError> {
        Self::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| RellichError::UnknownScenario(s.to_string()))
    }

    /// Whether the field is analytic (absolute tolerances apply) rather than
    /// a finite element eigenfunction (trend only).
    pub fn is_analytic(self) -> bool {
        self != Scenario::BucklingDisk
    }

    pub fn domain(self) -> Domain {
        match self {
            Scenario::SineSquare | Scenario::LinearPairSquare | Scenario::QuarticSquare => unit_square(),
            _ => Domain::disk(1.0).expect("unit disk"),
        }
    }

    /// Evaluates the scenario's identity on the level-`level` mesh.
    pub fn run(self, level: usize, q: &QuadratureOptions) -> Result<IdentityResidual, RellichError> {
        let domain = self.domain();
        let mesh = domain.mesh(level)?;
        let origin = VectorField::position([0.0, 0.0]);
        let center = VectorField::position([0.5, 0.5]);
        match self {
            Scenario::ConstantDisk => rellich_residual(&domain, &mesh, &AnalyticField::constant(1.0), &origin, 0.0, q),
            Scenario::SineSquare => rellich_residual(&domain, &mesh, &AnalyticField::sine_product(), &center, 2.0 * PI * PI, q),
            Scenario::SaddleDisk => rellich_residual(&domain, &mesh, &AnalyticField::saddle(), &origin, 0.0, q),
            Scenario::SaddleDiskLambda => rellich_residual(&domain, &mesh, &AnalyticField::saddle(), &origin, 1.0, q),
            Scenario::LinearPairSquare => polarized_residual(
                &domain,
                &mesh,
                &AnalyticField::linear(1.0, 0.0),
                &AnalyticField::linear(0.0, 1.0),
                &origin,
                q,
            ),
            Scenario::QuarticSquare => rellich2_residual(&domain, &mesh, &AnalyticField::quartic(), &center, 0.0, q),
            Scenario::BucklingDisk => {
                let disc = Discretization::new(&domain, &mesh, 2, 4)?;
                let r = problems::solve(ProblemKind::Buckling, &disc, 1, &SolverOptions::default())?;
                let w = FemField::new("buckling u_1", &disc.space, domain.metric, &r.eigen.vectors[0]).with_laplacian(&r.laplacians[0]);
                rellich2_residual(&domain, &disc.space.mesh, &w, &origin, r.eigen.values[0], q)
            }
        }
    }
}

/// Least-squares slope of `log2(residual)` against the refinement level,
/// negated: the observed order for a mesh size halving per level.
pub fn refinement_slope(residuals: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = residuals.iter().enumerate().filter(|(_, r)| **r > 0.0).map(|(i, r)| (i as f64, r.log2())).collect();
    if pts.len() < 2 || pts.len() != residuals.len() {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(-sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_has_zero_terms() {
        let d = Domain::disk(1.0).unwrap();
        let m = d.mesh(1).unwrap();
        let r = rellich_residual(&d, &m, &AnalyticField::constant(3.0), &VectorField::position([0.0, 0.0]), 0.0, &QuadratureOptions::default())
            .unwrap();
        assert_eq!(r.residual, 0.0);
        assert!(r.rhs_terms.values().all(|&v| v == 0.0));
        assert_eq!(r.rhs_terms.len(), 6);
    }

    #[test]
    fn linear_pair_is_exact() {
        let d = unit_square();
        let m = d.mesh(1).unwrap();
        let r = polarized_residual(
            &d,
            &m,
            &AnalyticField::linear(1.0, 0.0),
            &AnalyticField::linear(0.0, 1.0),
            &VectorField::position([0.0, 0.0]),
            &QuadratureOptions::default(),
        )
        .unwrap();
        assert!(r.residual <= 1e-10, "{r:?}");
    }

    #[test]
    fn polarization_doubles_first_order_terms() {
        let d = unit_square();
        let m = d.mesh(2).unwrap();
        let f = VectorField::position([0.5, 0.5]);
        let q = QuadratureOptions::default();
        let w = AnalyticField::sine_product();
        let single = rellich_residual(&d, &m, &w, &f, 0.0, &q).unwrap();
        let pol = polarized_residual(&d, &m, &w, &w, &f, &q).unwrap();
        assert!((pol.lhs - 2.0 * single.lhs).abs() < 1e-12);
        assert!((pol.residual - 2.0 * single.residual).abs() < 1e-12);
    }

    #[test]
    fn low_degree_rejected() {
        let d = unit_square();
        let m = d.mesh(0).unwrap();
        let q = QuadratureOptions { interior_degree: 4, boundary_degree: 9 };
        assert!(matches!(
            rellich_residual(&d, &m, &AnalyticField::saddle(), &VectorField::position([0.0; 2]), 0.0, &q),
            Err(RellichError::LowQuadrature(4))
        ));
    }

    #[test]
    fn missing_laplacian_is_reported() {
        let d = unit_square();
        let m = d.mesh(0).unwrap();
        let w = AnalyticField::new("bare", |x| x[0], |_| [1.0, 0.0]);
        assert!(matches!(
            rellich_residual(&d, &m, &w, &VectorField::position([0.0; 2]), 0.0, &QuadratureOptions::default()),
            Err(RellichError::MissingDerivative { .. })
        ));
    }

    #[test]
    fn grad_rho_derivatives_agree_with_differences() {
        for d in [Domain::disk(1.0).unwrap(), Domain::hyperbolic_disk(1.0, -1.0).unwrap(), Domain::spherical_cap(0.5, 1.0).unwrap()] {
            let f = VectorField::grad_rho(&d);
            for x in [[0.1, 0.05], [-0.2, 0.3], [0.01, -0.15]] {
                let (a, b) = (f.covariant_at(x), f.covariant_fd(x));
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((a[i][j] - b[i][j]).abs() < 1e-6, "{} {x:?}: {a:?} vs {b:?}", d.name);
                    }
                }
                let c = d.metric.conformal_factor(x);
                assert!(((a[0][0] + a[1][1]) / (c * c) - f.divergence_at(x)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(Scenario::parse(s.name()).unwrap(), s);
        }
        assert!(Scenario::parse("nope").is_err());
    }

    #[test]
    fn slope_of_exact_powers() {
        let r: Vec<f64> = (0..4).map(|i| 3.0 * 0.25f64.powi(i)).collect();
        assert!((refinement_slope(&r).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(refinement_slope(&[1.0]), None);
        assert_eq!(refinement_slope(&[1.0, 0.0]), None);
    }

    #[test]
    fn position_field_conditions() {
        let d = Domain::disk(1.0).unwrap();
        let m = d.mesh(2).unwrap();
        let r = field_conditions(&d, &m, &VectorField::position([0.0, 0.0]), &QuadratureOptions::default()).unwrap();
        assert_eq!((r.c1_div, r.c2_div, r.alpha), (2.0, 2.0, 1.0));
        let g = crate::geometry::geometric_quantities(&d, &m).unwrap();
        assert!((r.boundary_min - g.h_min).abs() < 1e-14);
    }
}
