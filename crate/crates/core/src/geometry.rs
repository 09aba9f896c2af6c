//! Constant-curvature metric models in conformal charts, domains, and the
//! geometric quantities entering the eigenvalue inequalities.
//!
//! The metric is `g = c(x)^2 (dx^2 + dy^2)` with `c = 1` for `kappa = 0` and
//! `c = 2 / (1 + kappa |x|^2)` otherwise (Poincare chart for `kappa < 0`,
//! stereographic chart for `kappa > 0`).

use std::f64::consts::PI;

use thiserror::Error;

use crate::mesh::{self, Mesh, MeshError};
use crate::quadrature;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("point ({x}, {y}) lies outside the chart of curvature {kappa}")]
    OutsideChart { x: f64, y: f64, kappa: f64 },
    #[error("base point ({x}, {y}) is not in the open interior of the domain")]
    BasePointOutside { x: f64, y: f64 },
    #[error("spherical domain exceeds the admissible geodesic radius: {radius} >= {limit}")]
    BeyondHemisphere { radius: f64, limit: f64 },
    #[error("invalid domain parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Euclidean,
    Hyperbolic,
    Spherical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricModel {
    pub kappa: f64,
}

impl MetricModel {
    pub fn euclidean() -> Self {
        Self { kappa: 0.0 }
    }

    pub fn with_curvature(kappa: f64) -> Self {
        Self { kappa }
    }

    pub fn kind(&self) -> MetricKind {
        if self.kappa == 0.0 {
            MetricKind::Euclidean
        } else if self.kappa < 0.0 {
            MetricKind::Hyperbolic
        } else {
            MetricKind::Spherical
        }
    }

    pub fn is_euclidean(&self) -> bool {
        self.kappa == 0.0
    }

    pub fn in_chart(&self, x: [f64; 2]) -> bool {
        let r2 = x[0] * x[0] + x[1] * x[1];
        match self.kind() {
            MetricKind::Hyperbolic => r2 * (-self.kappa) < 1.0,
            _ => r2.is_finite(),
        }
    }

    pub fn conformal_factor(&self, x: [f64; 2]) -> f64 {
        if self.kappa == 0.0 {
            1.0
        } else {
            2.0 / (1.0 + self.kappa * (x[0] * x[0] + x[1] * x[1]))
        }
    }

    /// Gradient of `ln c`.
    pub fn grad_log_conformal(&self, x: [f64; 2]) -> [f64; 2] {
        if self.kappa == 0.0 {
            return [0.0, 0.0];
        }
        let a = 1.0 + self.kappa * (x[0] * x[0] + x[1] * x[1]);
        [-2.0 * self.kappa * x[0] / a, -2.0 * self.kappa * x[1] / a]
    }

    /// Chart radius of a geodesic circle of radius `rho` about the origin.
    pub fn chart_radius(&self, rho: f64) -> f64 {
        let s = self.kappa.abs().sqrt();
        match self.kind() {
            MetricKind::Euclidean => rho,
            MetricKind::Hyperbolic => (0.5 * s * rho).tanh() / s,
            MetricKind::Spherical => (0.5 * s * rho).tan() / s,
        }
    }

    /// Geodesic distance, closed form in the chart.
    pub fn distance(&self, p: [f64; 2], x: [f64; 2]) -> Result<f64, GeometryError> {
        for q in [p, x] {
            if !self.in_chart(q) {
                return Err(GeometryError::OutsideChart { x: q[0], y: q[1], kappa: self.kappa });
            }
        }
        let (dx, dy) = (x[0] - p[0], x[1] - p[1]);
        let e = dx.hypot(dy);
        if self.kappa == 0.0 {
            return Ok(e);
        }
        let s = self.kappa.abs().sqrt();
        let ax = 1.0 + self.kappa * (x[0] * x[0] + x[1] * x[1]);
        let ap = 1.0 + self.kappa * (p[0] * p[0] + p[1] * p[1]);
        let arg = s * e / (ax * ap).sqrt();
        Ok(match self.kind() {
            MetricKind::Hyperbolic => 2.0 / s * arg.asinh(),
            _ => 2.0 / s * arg.min(1.0).asin(),
        })
    }

    /// Chart (Euclidean) gradient of `x -> d(p, x)`; its Euclidean length is `c(x)`.
    pub fn distance_gradient(&self, p: [f64; 2], x: [f64; 2]) -> [f64; 2] {
        let (dx, dy) = (x[0] - p[0], x[1] - p[1]);
        let qe = dx * dx + dy * dy;
        if qe == 0.0 {
            return [0.0, 0.0];
        }
        if self.kappa == 0.0 {
            let e = qe.sqrt();
            return [dx / e, dy / e];
        }
        let k = self.kappa;
        let s = k.abs().sqrt();
        let ax = 1.0 + k * (x[0] * x[0] + x[1] * x[1]);
        let ap = 1.0 + k * (p[0] * p[0] + p[1] * p[1]);
        let q = k.abs() * qe / (ax * ap);
        let pref = k.abs() / ap;
        let gq = [
            pref * (2.0 * dx / ax - qe * 2.0 * k * x[0] / (ax * ax)),
            pref * (2.0 * dy / ax - qe * 2.0 * k * x[1] / (ax * ax)),
        ];
        let dd = match self.kind() {
            MetricKind::Hyperbolic => 1.0 / (s * q.sqrt() * (1.0 + q).sqrt()),
            _ => 1.0 / (s * q.sqrt() * (1.0 - q).sqrt()),
        };
        [dd * gq[0], dd * gq[1]]
    }

    /// Chart components of `grad rho_p` with `rho_p = d_p^2 / 2`.
    pub fn grad_rho(&self, p: [f64; 2], x: [f64; 2]) -> [f64; 2] {
        let d = self.distance(p, x).unwrap_or(f64::NAN);
        let g = self.distance_gradient(p, x);
        let c = self.conformal_factor(x);
        [d * g[0] / (c * c), d * g[1] / (c * c)]
    }
}

/// Boundary curve of a simply connected domain in chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum Boundary {
    Circle { center: [f64; 2], radius: f64 },
    Ellipse { center: [f64; 2], a: f64, b: f64 },
    /// Axis-aligned rectangle, meshed with a structured grid.
    Rectangle { origin: [f64; 2], width: f64, height: f64 },
    /// Counterclockwise simple polygon.
    Polygon { vertices: Vec<[f64; 2]> },
}

/// Point of an exact smooth boundary curve.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub x: [f64; 2],
    /// Outward unit normal (chart).
    pub normal: [f64; 2],
    /// Euclidean arc-length per unit parameter.
    pub speed: f64,
}

impl Boundary {
    pub fn is_curved(&self) -> bool {
        matches!(self, Boundary::Circle { .. } | Boundary::Ellipse { .. })
    }

    /// Curve parameter of a point on a curved boundary.
    pub fn param_of(&self, p: [f64; 2]) -> Option<f64> {
        match *self {
            Boundary::Circle { center, .. } => Some((p[1] - center[1]).atan2(p[0] - center[0])),
            Boundary::Ellipse { center, a, b } => Some(((p[1] - center[1]) / b).atan2((p[0] - center[0]) / a)),
            _ => None,
        }
    }

    pub fn curve_point(&self, t: f64) -> Option<CurvePoint> {
        match *self {
            Boundary::Circle { center, radius } => Some(CurvePoint {
                x: [center[0] + radius * t.cos(), center[1] + radius * t.sin()],
                normal: [t.cos(), t.sin()],
                speed: radius,
            }),
            Boundary::Ellipse { center, a, b } => {
                let (tx, ty) = (-a * t.sin(), b * t.cos());
                let speed = tx.hypot(ty);
                Some(CurvePoint {
                    x: [center[0] + a * t.cos(), center[1] + b * t.sin()],
                    normal: [ty / speed, -tx / speed],
                    speed,
                })
            }
            _ => None,
        }
    }

    /// Closest point on the boundary curve, used for refinement.
    pub fn project(&self, p: [f64; 2]) -> Result<[f64; 2], MeshError> {
        match *self {
            Boundary::Circle { center, radius } => Ok(mesh::project_circle(p, center, radius)),
            Boundary::Ellipse { center, a, b } => {
                let q = [p[0] - center[0], p[1] - center[1]];
                let mut t = (q[1] / b).atan2(q[0] / a);
                for _ in 0..60 {
                    let (c, s) = (t.cos(), t.sin());
                    let f = (a * c - q[0]) * (-a * s) + (b * s - q[1]) * (b * c);
                    let df = a * a * s * s + b * b * c * c + (a * c - q[0]) * (-a * c) + (b * s - q[1]) * (-b * s);
                    let step = f / df;
                    t -= step;
                    if step.abs() < 1e-15 {
                        return Ok([center[0] + a * t.cos(), center[1] + b * t.sin()]);
                    }
                }
                Err(MeshError::Projection { x: p[0], y: p[1] })
            }
            _ => Ok(p),
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            Boundary::Circle { center, radius } => (p[0] - center[0]).hypot(p[1] - center[1]) < *radius,
            Boundary::Ellipse { center, a, b } => {
                let (u, v) = ((p[0] - center[0]) / a, (p[1] - center[1]) / b);
                u * u + v * v < 1.0
            }
            Boundary::Rectangle { origin, width, height } => {
                p[0] > origin[0] && p[0] < origin[0] + width && p[1] > origin[1] && p[1] < origin[1] + height
            }
            Boundary::Polygon { vertices } => point_in_polygon(p, vertices),
        }
    }
}

fn point_in_polygon(p: [f64; 2], poly: &[[f64; 2]]) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        // strictly interior: reject points on an edge
        let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        let within = (p[0] - a[0]) * (p[0] - b[0]) <= 0.0 && (p[1] - a[1]) * (p[1] - b[1]) <= 0.0;
        if cross.abs() < 1e-14 && within {
            return false;
        }
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let xc = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < xc {
                inside = !inside;
            }
        }
    }
    inside
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub name: String,
    pub metric: MetricModel,
    pub boundary: Boundary,
    pub base_point: [f64; 2],
}

impl Domain {
    pub fn new(name: &str, metric: MetricModel, boundary: Boundary, base_point: [f64; 2]) -> Result<Self, GeometryError> {
        let d = Domain { name: name.to_string(), metric, boundary, base_point };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<(), GeometryError> {
        match &self.boundary {
            Boundary::Circle { radius, .. } if !(*radius > 0.0) => {
                return Err(GeometryError::InvalidParameter(format!("radius {radius}")))
            }
            Boundary::Ellipse { a, b, .. } if !(*a > 0.0 && *b > 0.0) => {
                return Err(GeometryError::InvalidParameter(format!("semi-axes {a}, {b}")))
            }
            Boundary::Rectangle { width, height, .. } if !(*width > 0.0 && *height > 0.0) => {
                return Err(GeometryError::InvalidParameter(format!("rectangle {width}x{height}")))
            }
            Boundary::Polygon { vertices } if vertices.len() < 3 => {
                return Err(GeometryError::InvalidParameter("polygon needs 3 vertices".into()))
            }
            _ => {}
        }
        if !self.boundary.contains(self.base_point) {
            return Err(GeometryError::BasePointOutside { x: self.base_point[0], y: self.base_point[1] });
        }
        for q in self.boundary_probe() {
            if !self.metric.in_chart(q) {
                return Err(GeometryError::OutsideChart { x: q[0], y: q[1], kappa: self.metric.kappa });
            }
        }
        if self.metric.kind() == MetricKind::Spherical {
            let limit = PI / (2.0 * self.metric.kappa.sqrt());
            // the farthest boundary point from p bounds the geodesic radius
            let radius = self
                .boundary_probe()
                .iter()
                .map(|&q| self.metric.distance(self.base_point, q).unwrap_or(f64::INFINITY))
                .fold(0.0, f64::max);
            if radius >= limit {
                return Err(GeometryError::BeyondHemisphere { radius, limit });
            }
        }
        Ok(())
    }

    fn boundary_probe(&self) -> Vec<[f64; 2]> {
        match &self.boundary {
            Boundary::Circle { .. } | Boundary::Ellipse { .. } => (0..256)
                .map(|k| self.boundary.curve_point(2.0 * PI * k as f64 / 256.0).unwrap().x)
                .collect(),
            Boundary::Rectangle { origin, width, height } => vec![
                *origin,
                [origin[0] + width, origin[1]],
                [origin[0] + width, origin[1] + height],
                [origin[0], origin[1] + height],
            ],
            Boundary::Polygon { vertices } => vertices.clone(),
        }
    }

    pub fn disk(radius: f64) -> Result<Self, GeometryError> {
        Self::disk_at([0.0, 0.0], radius)
    }

    pub fn disk_at(center: [f64; 2], radius: f64) -> Result<Self, GeometryError> {
        Self::new("disk", MetricModel::euclidean(), Boundary::Circle { center, radius }, center)
    }

    /// Square of the given side centered at the origin.
    pub fn square(side: f64) -> Result<Self, GeometryError> {
        let mut d = Self::rectangle(side, side)?;
        d.name = "square".into();
        Ok(d)
    }

    /// Rectangle centered at the origin.
    pub fn rectangle(width: f64, height: f64) -> Result<Self, GeometryError> {
        Self::new(
            "rectangle",
            MetricModel::euclidean(),
            Boundary::Rectangle { origin: [-0.5 * width, -0.5 * height], width, height },
            [0.0, 0.0],
        )
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self, GeometryError> {
        Self::new("ellipse", MetricModel::euclidean(), Boundary::Ellipse { center: [0.0, 0.0], a, b }, [0.0, 0.0])
    }

    pub fn polygon(vertices: Vec<[f64; 2]>, base_point: [f64; 2]) -> Result<Self, GeometryError> {
        Self::new("polygon", MetricModel::euclidean(), Boundary::Polygon { vertices }, base_point)
    }

    /// Convex 16-gon sampled from `r(t) = 1 + 0.08 cos(3t)`, translated so its
    /// centroid is the origin.
    pub fn blob() -> Result<Self, GeometryError> {
        let n = 16;
        let mut v: Vec<[f64; 2]> = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                let r = 1.0 + 0.08 * (3.0 * t).cos();
                [r * t.cos(), r * t.sin()]
            })
            .collect();
        let c = polygon_centroid(&v);
        for p in &mut v {
            p[0] -= c[0];
            p[1] -= c[1];
        }
        let mut d = Self::polygon(v, [0.0, 0.0])?;
        d.name = "blob".into();
        Ok(d)
    }

    /// L-shaped domain `[0,2]^2 \ [1,2]^2` with the base point near the tip
    /// of the horizontal leg, so it is not star-shaped with respect to it.
    pub fn lshape() -> Result<Self, GeometryError> {
        let v = vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]];
        let mut d = Self::polygon(v, [1.75, 0.5])?;
        d.name = "lshape".into();
        Ok(d)
    }

    /// Geodesic disk about the chart origin in constant curvature `kappa < 0`.
    pub fn hyperbolic_disk(geodesic_radius: f64, kappa: f64) -> Result<Self, GeometryError> {
        if !(kappa < 0.0) {
            return Err(GeometryError::InvalidParameter(format!("hyperbolic disk needs kappa < 0, got {kappa}")));
        }
        let metric = MetricModel::with_curvature(kappa);
        let r = metric.chart_radius(geodesic_radius);
        Self::new("hyperbolic-disk", metric, Boundary::Circle { center: [0.0, 0.0], radius: r }, [0.0, 0.0])
    }

    /// Geodesic cap about the chart origin in constant curvature `kappa > 0`.
    pub fn spherical_cap(geodesic_radius: f64, kappa: f64) -> Result<Self, GeometryError> {
        if !(kappa > 0.0) {
            return Err(GeometryError::InvalidParameter(format!("spherical cap needs kappa > 0, got {kappa}")));
        }
        let limit = PI / (2.0 * kappa.sqrt());
        if geodesic_radius >= limit {
            return Err(GeometryError::BeyondHemisphere { radius: geodesic_radius, limit });
        }
        let metric = MetricModel::with_curvature(kappa);
        let r = metric.chart_radius(geodesic_radius);
        Self::new("spherical-cap", metric, Boundary::Circle { center: [0.0, 0.0], radius: r }, [0.0, 0.0])
    }

    pub fn with_base_point(mut self, p: [f64; 2]) -> Result<Self, GeometryError> {
        self.base_point = p;
        self.validate()?;
        Ok(self)
    }

    /// Euclidean dilation of the chart by `t` (Euclidean domains only).
    pub fn scaled(&self, t: f64) -> Result<Self, GeometryError> {
        if !self.metric.is_euclidean() {
            return Err(GeometryError::InvalidParameter("only Euclidean domains can be dilated".into()));
        }
        let s = |p: [f64; 2]| [t * p[0], t * p[1]];
        let boundary = match &self.boundary {
            Boundary::Circle { center, radius } => Boundary::Circle { center: s(*center), radius: t * radius },
            Boundary::Ellipse { center, a, b } => Boundary::Ellipse { center: s(*center), a: t * a, b: t * b },
            Boundary::Rectangle { origin, width, height } => {
                Boundary::Rectangle { origin: s(*origin), width: t * width, height: t * height }
            }
            Boundary::Polygon { vertices } => Boundary::Polygon { vertices: vertices.iter().map(|&p| s(p)).collect() },
        };
        Domain::new(&self.name, self.metric, boundary, s(self.base_point))
    }

    pub fn distance(&self, x: [f64; 2]) -> Result<f64, GeometryError> {
        self.metric.distance(self.base_point, x)
    }

    /// Mesh at refinement `level`. Curved boundaries are projected onto the
    /// exact curve at every refinement.
    pub fn mesh(&self, level: usize) -> Result<Mesh, GeometryError> {
        let mut m = match &self.boundary {
            Boundary::Circle { center, radius } => return Ok(mesh::mesh_disk_at(*center, *radius, level)?),
            Boundary::Ellipse { center, a, b } => {
                let unit = mesh::mesh_disk(1.0, 0)?;
                let vertices = unit.vertices.iter().map(|p| [center[0] + a * p[0], center[1] + b * p[1]]).collect();
                Mesh::from_parts(vertices, unit.triangles.clone(), None)?
            }
            Boundary::Rectangle { origin, width, height } => {
                let short = width.min(*height);
                let nx0 = (2.0 * width / short).round().max(1.0) as usize;
                let ny0 = (2.0 * height / short).round().max(1.0) as usize;
                let scale = 1usize << level;
                let mut m = mesh::mesh_rectangle(*width, *height, nx0 * scale, ny0 * scale)?;
                for p in &mut m.vertices {
                    p[0] += origin[0];
                    p[1] += origin[1];
                }
                return Ok(m);
            }
            Boundary::Polygon { vertices } => {
                let c = polygon_centroid(vertices);
                if is_convex(vertices) {
                    mesh::mesh_fan(c, vertices)?
                } else {
                    mesh::mesh_polygon(vertices)?
                }
            }
        };
        for _ in 0..level {
            m = self.refine(&m)?;
        }
        Ok(m)
    }

    pub fn refine(&self, m: &Mesh) -> Result<Mesh, GeometryError> {
        let b = &self.boundary;
        Ok(m.refine_with(&|p, _| b.project(p))?)
    }
}

pub fn polygon_centroid(v: &[[f64; 2]]) -> [f64; 2] {
    let n = v.len();
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (p, q) = (v[i], v[(i + 1) % n]);
        let cr = p[0] * q[1] - q[0] * p[1];
        a += 0.5 * cr;
        cx += (p[0] + q[0]) * cr;
        cy += (p[1] + q[1]) * cr;
    }
    [cx / (6.0 * a), cy / (6.0 * a)]
}

fn is_convex(v: &[[f64; 2]]) -> bool {
    let n = v.len();
    (0..n).all(|i| mesh::triangle_area(v[i], v[(i + 1) % n], v[(i + 2) % n]) > 0.0)
}

/// `<grad rho_p, nu>_g` at a boundary point with outward chart normal `normal`.
pub fn support_function(domain: &Domain, s: [f64; 2], normal: [f64; 2]) -> Result<f64, GeometryError> {
    let m = &domain.metric;
    let d = m.distance(domain.base_point, s)?;
    let g = m.distance_gradient(domain.base_point, s);
    Ok(d * (g[0] * normal[0] + g[1] * normal[1]) / m.conformal_factor(s))
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GeometricQuantities {
    pub r_max: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub volume: f64,
    pub boundary_length: f64,
    pub inertia2: f64,
    /// `|int (x - p) dv|`, Euclidean only.
    pub centroid_residual: Option<f64>,
    pub diameter: f64,
    pub star_shaped: bool,
    /// Support-function samples per boundary edge (edge interior points).
    pub samples_per_edge: usize,
}

pub const SUPPORT_SAMPLES_PER_EDGE: usize = 8;

pub fn geometric_quantities(domain: &Domain, mesh: &Mesh) -> Result<GeometricQuantities, GeometryError> {
    let m = &domain.metric;
    let p = domain.base_point;
    let mut r_max: f64 = 0.0;
    let mut h_min = f64::INFINITY;
    let mut h_max = f64::NEG_INFINITY;
    let mut boundary_length = 0.0;
    let edge = quadrature::edge_rule(9).expect("shipped rule");
    for e in &mesh.boundary_edges {
        let (a, b) = (mesh.vertices[e.v[0]], mesh.vertices[e.v[1]]);
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        let at = |t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
        // endpoints use this edge's one-sided normal
        let n = SUPPORT_SAMPLES_PER_EDGE;
        let samples = std::iter::once(0.0)
            .chain((0..n).map(|i| (i as f64 + 0.5) / n as f64))
            .chain(std::iter::once(1.0));
        for t in samples {
            let x = at(t);
            r_max = r_max.max(m.distance(p, x)?);
            let h = support_function(domain, x, e.normal)?;
            h_min = h_min.min(h);
            h_max = h_max.max(h);
        }
        for (t, w) in edge.points.iter().zip(&edge.weights) {
            boundary_length += w * len * m.conformal_factor(at(*t));
        }
    }
    let rule = quadrature::triangle_rule(7).expect("shipped rule");
    let (mut volume, mut inertia2, mut cx, mut cy) = (0.0, 0.0, 0.0, 0.0);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let area = mesh.area(t);
        if !(area > 0.0) {
            return Err(GeometryError::DegenerateMesh(format!("triangle {t} has area {area:e}")));
        }
        let v = [mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]];
        for (bc, w) in rule.points.iter().zip(&rule.weights) {
            let x = [
                bc[0] * v[0][0] + bc[1] * v[1][0] + bc[2] * v[2][0],
                bc[0] * v[0][1] + bc[1] * v[1][1] + bc[2] * v[2][1],
            ];
            let c = m.conformal_factor(x);
            let dv = w * area * c * c;
            let d = m.distance(p, x)?;
            volume += dv;
            inertia2 += d * d * dv;
            cx += (x[0] - p[0]) * dv;
            cy += (x[1] - p[1]) * dv;
        }
    }
    let mut diameter: f64 = 0.0;
    let bverts: Vec<[f64; 2]> = mesh.boundary_edges.iter().map(|e| mesh.vertices[e.v[0]]).collect();
    for i in 0..bverts.len() {
        for j in i + 1..bverts.len() {
            diameter = diameter.max(m.distance(bverts[i], bverts[j])?);
        }
    }
    Ok(GeometricQuantities {
        r_max,
        h_min,
        h_max,
        volume,
        boundary_length,
        inertia2,
        centroid_residual: m.is_euclidean().then(|| cx.hypot(cy)),
        diameter,
        star_shaped: h_min > 0.0,
        samples_per_edge: SUPPORT_SAMPLES_PER_EDGE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_distance() {
        let m = MetricModel::euclidean();
        assert_eq!(m.distance([0.0, 0.0], [3.0, 4.0]).unwrap(), 5.0);
    }

    #[test]
    fn poincare_distance_from_origin() {
        let m = MetricModel::with_curvature(-1.0);
        let d = m.distance([0.0, 0.0], [0.5, 0.0]).unwrap();
        assert!((d - 2.0 * 0.5f64.atanh()).abs() < 1e-14);
        assert!(m.distance([0.0, 0.0], [1.2, 0.0]).is_err());
    }

    #[test]
    fn chart_radius_inverts_distance() {
        for kappa in [-2.0, -1.0, 0.0, 0.5, 1.0] {
            let m = MetricModel::with_curvature(kappa);
            let r = m.chart_radius(0.7);
            let d = m.distance([0.0, 0.0], [0.0, r]).unwrap();
            assert!((d - 0.7).abs() < 1e-13, "kappa {kappa}");
        }
    }

    #[test]
    fn support_function_examples() {
        let sq = Domain::square(1.0).unwrap();
        assert_eq!(support_function(&sq, [0.5, 0.1], [1.0, 0.0]).unwrap(), 0.5);
        let el = Domain::ellipse(2.0, 1.0).unwrap();
        assert_eq!(support_function(&el, [2.0, 0.0], [1.0, 0.0]).unwrap(), 2.0);
    }

    #[test]
    fn lshape_is_not_star_shaped() {
        let d = Domain::lshape().unwrap();
        let m = d.mesh(1).unwrap();
        let g = geometric_quantities(&d, &m).unwrap();
        assert!(!g.star_shaped && g.h_min < 0.0);
    }

    #[test]
    fn spherical_cap_radius_is_limited() {
        assert!(Domain::spherical_cap(1.6, 1.0).is_err());
        assert!(Domain::spherical_cap(0.5, 1.0).is_ok());
    }
}
