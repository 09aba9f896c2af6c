//! P1/P2 Lagrange spaces and metric-weighted assembly.
//!
//! In two dimensions the Dirichlet energy is conformally invariant, so for
//! `g = c^2 delta` the stiffness matrix equals the Euclidean one. The mass
//! matrix carries the weight `c^2` and the boundary mass the weight `c`.

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::MetricModel;
use crate::linalg::CsrMatrix;
use crate::mesh::Mesh;
use crate::quadrature::{self, EdgeRule, QuadratureError, TriangleRule};

#[derive(Debug, Error)]
pub enum FemError {
    #[error("unsupported element order {0} (expected 1 or 2)")]
    InvalidOrder(usize),
    #[error("boundary weight {value:e} is not positive at ({x}, {y})")]
    NonPositiveWeight { x: f64, y: f64, value: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

const CHUNK: usize = 256;

#[derive(Debug, Clone)]
pub struct FeSpace {
    pub mesh: Mesh,
    pub order: usize,
    pub dof_coords: Vec<[f64; 2]>,
    /// Local dofs per triangle: vertices, then midpoints of edges 01, 12, 20.
    pub elem_dofs: Vec<[usize; 6]>,
    /// Dofs of each boundary edge: start vertex, end vertex, midpoint.
    pub boundary_edge_dofs: Vec<[usize; 3]>,
    pub is_boundary: Vec<bool>,
    pub boundary_dofs: Vec<usize>,
    pub interior_dofs: Vec<usize>,
}

/// Evaluation point inside a triangle.
#[derive(Debug, Clone, Copy)]
pub struct ElementPoint {
    pub element: usize,
    pub bary: [f64; 3],
}

impl FeSpace {
    pub fn new(mesh: &Mesh, order: usize) -> Result<FeSpace, FemError> {
        if order != 1 && order != 2 {
            return Err(FemError::InvalidOrder(order));
        }
        let nv = mesh.vertices.len();
        let mut dof_coords = mesh.vertices.clone();
        let mut is_boundary = mesh.on_boundary.clone();
        let mut elem_dofs = Vec::with_capacity(mesh.triangles.len());
        let mut boundary_edge_dofs = Vec::with_capacity(mesh.boundary_edges.len());
        if order == 1 {
            for t in &mesh.triangles {
                elem_dofs.push([t[0], t[1], t[2], usize::MAX, usize::MAX, usize::MAX]);
            }
            for e in &mesh.boundary_edges {
                boundary_edge_dofs.push([e.v[0], e.v[1], usize::MAX]);
            }
        } else {
            let topo = mesh.topology();
            for &[a, b] in &topo.edges {
                let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
                dof_coords.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
                is_boundary.push(false);
            }
            for (t, tri) in mesh.triangles.iter().enumerate() {
                let te = topo.tri_edges[t];
                elem_dofs.push([tri[0], tri[1], tri[2], nv + te[0], nv + te[1], nv + te[2]]);
            }
            for e in &mesh.boundary_edges {
                let mid = nv + topo.tri_edges[e.triangle][e.local];
                is_boundary[mid] = true;
                boundary_edge_dofs.push([e.v[0], e.v[1], mid]);
            }
        }
        let boundary_dofs = (0..dof_coords.len()).filter(|&i| is_boundary[i]).collect();
        let interior_dofs = (0..dof_coords.len()).filter(|&i| !is_boundary[i]).collect();
        Ok(FeSpace {
            mesh: mesh.clone(),
            order,
            dof_coords,
            elem_dofs,
            boundary_edge_dofs,
            is_boundary,
            boundary_dofs,
            interior_dofs,
        })
    }

    pub fn dof_count(&self) -> usize {
        self.dof_coords.len()
    }

    pub fn local_count(&self) -> usize {
        if self.order == 1 {
            3
        } else {
            6
        }
    }

    pub fn local_dofs(&self, t: usize) -> &[usize] {
        &self.elem_dofs[t][..self.local_count()]
    }

    pub fn element_vertices(&self, t: usize) -> [[f64; 2]; 3] {
        let tri = self.mesh.triangles[t];
        [self.mesh.vertices[tri[0]], self.mesh.vertices[tri[1]], self.mesh.vertices[tri[2]]]
    }

    pub fn point(&self, t: usize, bary: [f64; 3]) -> [f64; 2] {
        let v = self.element_vertices(t);
        [
            bary[0] * v[0][0] + bary[1] * v[1][0] + bary[2] * v[2][0],
            bary[0] * v[0][1] + bary[1] * v[1][1] + bary[2] * v[2][1],
        ]
    }

    /// Gradients of the barycentric coordinates and the triangle area.
    pub fn bary_gradients(&self, t: usize) -> ([[f64; 2]; 3], f64) {
        let [p0, p1, p2] = self.element_vertices(t);
        let area2 = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let g = [
            [(p1[1] - p2[1]) / area2, (p2[0] - p1[0]) / area2],
            [(p2[1] - p0[1]) / area2, (p0[0] - p2[0]) / area2],
            [(p0[1] - p1[1]) / area2, (p1[0] - p0[0]) / area2],
        ];
        (g, 0.5 * area2)
    }

    /// Shape function values at a barycentric point.
    pub fn shape(&self, l: [f64; 3]) -> [f64; 6] {
        if self.order == 1 {
            return [l[0], l[1], l[2], 0.0, 0.0, 0.0];
        }
        [
            l[0] * (2.0 * l[0] - 1.0),
            l[1] * (2.0 * l[1] - 1.0),
            l[2] * (2.0 * l[2] - 1.0),
            4.0 * l[0] * l[1],
            4.0 * l[1] * l[2],
            4.0 * l[2] * l[0],
        ]
    }

    pub fn shape_gradients(&self, l: [f64; 3], g: &[[f64; 2]; 3]) -> [[f64; 2]; 6] {
        let mut out = [[0.0; 2]; 6];
        if self.order == 1 {
            out[..3].copy_from_slice(g);
            return out;
        }
        for i in 0..3 {
            let s = 4.0 * l[i] - 1.0;
            out[i] = [s * g[i][0], s * g[i][1]];
        }
        for (k, (a, b)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
            out[3 + k] = [
                4.0 * (l[a] * g[b][0] + l[b] * g[a][0]),
                4.0 * (l[a] * g[b][1] + l[b] * g[a][1]),
            ];
        }
        out
    }

    /// Constant Hessians of the P2 shape functions (zero for P1).
    pub fn shape_hessians(&self, g: &[[f64; 2]; 3]) -> [[[f64; 2]; 2]; 6] {
        let mut out = [[[0.0; 2]; 2]; 6];
        if self.order == 1 {
            return out;
        }
        for i in 0..3 {
            for r in 0..2 {
                for c in 0..2 {
                    out[i][r][c] = 4.0 * g[i][r] * g[i][c];
                }
            }
        }
        for (k, (a, b)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
            for r in 0..2 {
                for c in 0..2 {
                    out[3 + k][r][c] = 4.0 * (g[a][r] * g[b][c] + g[b][r] * g[a][c]);
                }
            }
        }
        out
    }

    /// Edge trace basis for parameter `t` from start to end vertex.
    pub fn edge_shape(&self, t: f64) -> [f64; 3] {
        if self.order == 1 {
            [1.0 - t, t, 0.0]
        } else {
            [(1.0 - t) * (1.0 - 2.0 * t), t * (2.0 * t - 1.0), 4.0 * t * (1.0 - t)]
        }
    }

    /// Barycentric coordinates of a boundary edge point at parameter `t`.
    pub fn edge_bary(&self, edge: usize, t: f64) -> (usize, [f64; 3]) {
        let e = &self.mesh.boundary_edges[edge];
        let mut l = [0.0; 3];
        l[e.local] = 1.0 - t;
        l[(e.local + 1) % 3] = t;
        (e.triangle, l)
    }

    pub fn value(&self, u: &[f64], p: ElementPoint) -> f64 {
        let phi = self.shape(p.bary);
        self.local_dofs(p.element).iter().zip(phi).map(|(&d, f)| u[d] * f).sum()
    }

    pub fn gradient(&self, u: &[f64], p: ElementPoint) -> [f64; 2] {
        let (g, _) = self.bary_gradients(p.element);
        let dphi = self.shape_gradients(p.bary, &g);
        let mut out = [0.0; 2];
        for (&d, gp) in self.local_dofs(p.element).iter().zip(dphi) {
            out[0] += u[d] * gp[0];
            out[1] += u[d] * gp[1];
        }
        out
    }

    /// Elementwise Euclidean Laplacian (constant per element for P2).
    pub fn element_laplacian(&self, u: &[f64], t: usize) -> f64 {
        let (g, _) = self.bary_gradients(t);
        let h = self.shape_hessians(&g);
        self.local_dofs(t).iter().zip(h).map(|(&d, hk)| u[d] * (hk[0][0] + hk[1][1])).sum()
    }

    pub fn interpolate(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.dof_coords.iter().map(|&x| f(x)).collect()
    }

    /// Expands a vector on a dof subset to full length with zeros elsewhere.
    pub fn expand(&self, dofs: &[usize], x: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.dof_count()];
        for (&d, &v) in dofs.iter().zip(x) {
            u[d] = v;
        }
        u
    }
}

fn assemble_elements<F>(space: &FeSpace, local: F) -> CsrMatrix
where
    F: Fn(usize) -> [[f64; 6]; 6] + Sync,
{
    let n = space.dof_count();
    let lc = space.local_count();
    let idx: Vec<usize> = (0..space.mesh.triangles.len()).collect();
    let chunks: Vec<Vec<(usize, usize, f64)>> = idx
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut trips = Vec::with_capacity(chunk.len() * lc * lc);
            for &t in chunk {
                let k = local(t);
                let dofs = space.local_dofs(t);
                for i in 0..lc {
                    for j in 0..lc {
                        trips.push((dofs[i], dofs[j], k[i][j]));
                    }
                }
            }
            trips
        })
        .collect();
    CsrMatrix::from_triplets(n, n, chunks.concat())
}

/// `K[i,j] = int <grad phi_i, grad phi_j>_g dv_g`, metric independent.
pub fn assemble_stiffness(space: &FeSpace, metric: &MetricModel) -> CsrMatrix {
    let _ = metric;
    let rule = quadrature::triangle_rule(2).expect("shipped rule");
    let lc = space.local_count();
    let mut k = assemble_elements(space, |t| {
        let (g, area) = space.bary_gradients(t);
        let mut m = [[0.0; 6]; 6];
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let dphi = space.shape_gradients(*l, &g);
            for i in 0..lc {
                for j in i..lc {
                    m[i][j] += w * area * (dphi[i][0] * dphi[j][0] + dphi[i][1] * dphi[j][1]);
                }
            }
        }
        mirror(&mut m, lc);
        m
    });
    k.psd = true;
    k
}

/// `M[i,j] = int phi_i phi_j c^2 dx`.
pub fn assemble_mass(space: &FeSpace, metric: &MetricModel, degree: usize) -> Result<CsrMatrix, FemError> {
    let rule = quadrature::triangle_rule(degree)?;
    Ok(assemble_weighted_mass(space, &rule, |x| {
        let c = metric.conformal_factor(x);
        c * c
    }))
}

/// Mass matrix with an arbitrary density times `dx`.
pub fn assemble_weighted_mass(space: &FeSpace, rule: &TriangleRule, density: impl Fn([f64; 2]) -> f64 + Sync) -> CsrMatrix {
    let lc = space.local_count();
    let mut m = assemble_elements(space, |t| {
        let (_, area) = space.bary_gradients(t);
        let mut m = [[0.0; 6]; 6];
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let phi = space.shape(*l);
            let rho = density(space.point(t, *l));
            for i in 0..lc {
                for j in i..lc {
                    m[i][j] += w * area * rho * phi[i] * phi[j];
                }
            }
        }
        mirror(&mut m, lc);
        m
    });
    m.psd = true;
    m
}

fn mirror(m: &mut [[f64; 6]; 6], lc: usize) {
    for i in 0..lc {
        for j in 0..i {
            m[i][j] = m[j][i];
        }
    }
}

/// `B[i,j] = int_{boundary} phi_i phi_j w ds_g`, with `w = 1` if absent.
pub fn assemble_boundary_mass(
    space: &FeSpace,
    metric: &MetricModel,
    weight: Option<&(dyn Fn([f64; 2]) -> f64 + Sync)>,
) -> Result<CsrMatrix, FemError> {
    let degree = if weight.is_none() && metric.is_euclidean() { 4 } else { 9 };
    let rule = quadrature::edge_rule(degree)?;
    let n = space.dof_count();
    let nloc = if space.order == 1 { 2 } else { 3 };
    let mut trips = Vec::new();
    for (e, be) in space.mesh.boundary_edges.iter().enumerate() {
        let (a, b) = (space.mesh.vertices[be.v[0]], space.mesh.vertices[be.v[1]]);
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        let dofs = space.boundary_edge_dofs[e];
        let mut m = [[0.0; 3]; 3];
        for (t, w) in rule.points.iter().zip(&rule.weights) {
            let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            let wt = match weight {
                Some(f) => {
                    let v = f(x);
                    if !(v > 0.0) {
                        return Err(FemError::NonPositiveWeight { x: x[0], y: x[1], value: v });
                    }
                    v
                }
                None => 1.0,
            };
            let phi = space.edge_shape(*t);
            let ds = w * len * metric.conformal_factor(x) * wt;
            for i in 0..nloc {
                for j in i..nloc {
                    m[i][j] += ds * phi[i] * phi[j];
                }
            }
        }
        for i in 0..nloc {
            for j in 0..nloc {
                let v = if j >= i { m[i][j] } else { m[j][i] };
                trips.push((dofs[i], dofs[j], v));
            }
        }
    }
    let mut out = CsrMatrix::from_triplets(n, n, trips);
    out.psd = true;
    Ok(out)
}

/// One sample of the outward normal derivative on a boundary edge.
#[derive(Debug, Clone, Copy)]
pub struct NormalSample {
    pub edge: usize,
    pub t: f64,
    pub x: [f64; 2],
    /// `ds_g` quadrature weight.
    pub weight: f64,
    pub value: f64,
}

/// Sparse operator mapping a dof vector to `d_nu u` at edge quadrature
/// points, using the gradient of the adjacent triangle. Returns the operator
/// and the sample descriptors (with `value = 0`).
pub fn normal_derivative_operator(
    space: &FeSpace,
    metric: &MetricModel,
    rule: &EdgeRule,
) -> (CsrMatrix, Vec<NormalSample>) {
    let mut trips = Vec::new();
    let mut samples = Vec::new();
    for (e, be) in space.mesh.boundary_edges.iter().enumerate() {
        let (a, b) = (space.mesh.vertices[be.v[0]], space.mesh.vertices[be.v[1]]);
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        for (t, w) in rule.points.iter().zip(&rule.weights) {
            let (tri, l) = space.edge_bary(e, *t);
            let x = space.point(tri, l);
            let c = metric.conformal_factor(x);
            let (g, _) = space.bary_gradients(tri);
            let dphi = space.shape_gradients(l, &g);
            let row = samples.len();
            for (&d, gp) in space.local_dofs(tri).iter().zip(dphi) {
                trips.push((row, d, (gp[0] * be.normal[0] + gp[1] * be.normal[1]) / c));
            }
            samples.push(NormalSample { edge: e, t: *t, x, weight: w * len * c, value: 0.0 });
        }
    }
    (CsrMatrix::from_triplets(samples.len(), space.dof_count(), trips), samples)
}

/// `d_nu u` sampled at edge quadrature points of the given degree.
pub fn normal_derivative(space: &FeSpace, metric: &MetricModel, u: &[f64], degree: usize) -> Result<Vec<NormalSample>, FemError> {
    let rule = quadrature::edge_rule(degree)?;
    let (d, mut samples) = normal_derivative_operator(space, metric, &rule);
    let vals = d.matvec(u);
    for (s, v) in samples.iter_mut().zip(vals) {
        s.value = v;
    }
    Ok(samples)
}

/// Gram matrix `N[i,j] = int (d_nu phi_i)(d_nu phi_j) ds_g`.
pub fn normal_gram(space: &FeSpace, metric: &MetricModel, degree: usize) -> Result<CsrMatrix, FemError> {
    let rule = quadrature::edge_rule(degree)?;
    let (d, samples) = normal_derivative_operator(space, metric, &rule);
    let mut trips = Vec::new();
    for (r, s) in samples.iter().enumerate() {
        let row: Vec<(usize, f64)> = d.row(r).collect();
        for &(i, a) in &row {
            for &(j, b) in &row {
                trips.push((i, j, s.weight * a * b));
            }
        }
    }
    let n = space.dof_count();
    let mut out = CsrMatrix::from_triplets(n, n, trips);
    out.psd = true;
    Ok(out)
}

/// Assembled forms shared by all spectral problems on one space.
#[derive(Debug, Clone)]
pub struct Forms {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    pub boundary_mass: CsrMatrix,
}

impl Forms {
    pub fn assemble(space: &FeSpace, metric: &MetricModel, mass_degree: usize) -> Result<Forms, FemError> {
        let degree = if metric.is_euclidean() { mass_degree } else { mass_degree.max(7) };
        Ok(Forms {
            stiffness: assemble_stiffness(space, metric),
            mass: assemble_mass(space, metric, degree)?,
            boundary_mass: assemble_boundary_mass(space, metric, None)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{mesh_disk, mesh_rectangle, Mesh};

    #[test]
    fn reference_triangle_p1_stiffness() {
        let m = Mesh::from_parts(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]], None).unwrap();
        let s = FeSpace::new(&m, 1).unwrap();
        let k = assemble_stiffness(&s, &MetricModel::euclidean());
        let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k.get(i, j) - expect[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn constants_in_kernel_and_partition_of_unity() {
        let m = mesh_rectangle(1.0, 1.0, 1, 1).unwrap();
        for order in [1, 2] {
            let s = FeSpace::new(&m, order).unwrap();
            let metric = MetricModel::euclidean();
            let k = assemble_stiffness(&s, &metric);
            let one = vec![1.0; s.dof_count()];
            assert!(k.matvec(&one).iter().all(|v| v.abs() < 1e-14));
            let mm = assemble_mass(&s, &metric, 4).unwrap();
            assert!((mm.quad_form(&one) - 1.0).abs() < 1e-14);
            let b = assemble_boundary_mass(&s, &metric, None).unwrap();
            assert!((b.quad_form(&one) - 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn normal_derivative_of_x_on_square() {
        let m = mesh_rectangle(1.0, 1.0, 2, 2).unwrap();
        let s = FeSpace::new(&m, 2).unwrap();
        let u = s.interpolate(|p| p[0]);
        for smp in normal_derivative(&s, &MetricModel::euclidean(), &u, 4).unwrap() {
            let n = s.mesh.boundary_edges[smp.edge].normal;
            assert!((smp.value - n[0]).abs() < 1e-13);
        }
    }

    #[test]
    fn disk_dirichlet_energy_of_x() {
        let m = mesh_disk(1.0, 4).unwrap();
        let s = FeSpace::new(&m, 1).unwrap();
        let k = assemble_stiffness(&s, &MetricModel::euclidean());
        let u = s.interpolate(|p| p[0]);
        assert!((k.quad_form(&u) - std::f64::consts::PI).abs() < 2e-2);
    }
}
