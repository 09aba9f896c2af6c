//! Conforming triangulations, uniform refinement, generators and mesh I/O.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("invalid mesh parameter: {0}")]
    InvalidParameter(String),
    #[error("triangle {triangle} has non-positive area {area:e}")]
    Degenerate { triangle: usize, area: f64 },
    #[error("non-conforming mesh: {0}")]
    NonConforming(String),
    #[error("mesh is not simply connected (V - E + T = {0})")]
    NotSimplyConnected(i64),
    #[error("malformed mesh file at line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("unsupported element type {kind} (element {element}, line {line})")]
    UnsupportedElement { element: usize, kind: usize, line: usize },
    #[error("boundary projection did not converge near ({x}, {y})")]
    Projection { x: f64, y: f64 },
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge {
    /// Oriented so the domain lies to the left.
    pub v: [usize; 2],
    /// Outward unit normal in chart coordinates.
    pub normal: [f64; 2],
    /// Parent curve tag (physical tag for imported meshes).
    pub tag: usize,
    /// Adjacent triangle and the local edge index inside it.
    pub triangle: usize,
    pub local: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub on_boundary: Vec<bool>,
}

/// Edge connectivity. Local edge `e` of a triangle joins local vertices
/// `e` and `(e + 1) % 3`.
#[derive(Debug, Clone)]
pub struct Topology {
    pub edges: Vec<[usize; 2]>,
    pub tri_edges: Vec<[usize; 3]>,
    pub edge_tris: Vec<Vec<usize>>,
}

pub fn triangle_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

pub fn topology(vertex_count: usize, triangles: &[[usize; 3]]) -> Topology {
    let _ = vertex_count;
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut edge_tris: Vec<Vec<usize>> = Vec::new();
    let mut tri_edges = Vec::with_capacity(triangles.len());
    for (t, tri) in triangles.iter().enumerate() {
        let mut te = [0usize; 3];
        for e in 0..3 {
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            let key = (a.min(b), a.max(b));
            let id = *index.entry(key).or_insert_with(|| {
                edges.push([key.0, key.1]);
                edge_tris.push(Vec::new());
                edges.len() - 1
            });
            edge_tris[id].push(t);
            te[e] = id;
        }
        tri_edges.push(te);
    }
    Topology { edges, tri_edges, edge_tris }
}

impl Mesh {
    /// Validates connectivity and derives boundary edges from adjacency.
    /// `tags` maps an unordered boundary vertex pair to a curve tag.
    pub fn from_parts(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        tags: Option<&HashMap<(usize, usize), usize>>,
    ) -> Result<Mesh, MeshError> {
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(MeshError::NonConforming(format!("triangle {t} references a missing vertex")));
            }
            let area = triangle_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(area > 0.0) {
                return Err(MeshError::Degenerate { triangle: t, area });
            }
        }
        let topo = topology(vertices.len(), &triangles);
        let mut boundary_edges = Vec::new();
        let mut on_boundary = vec![false; vertices.len()];
        for (e, tris) in topo.edge_tris.iter().enumerate() {
            match tris.len() {
                1 => {
                    let t = tris[0];
                    let local = (0..3).find(|&l| topo.tri_edges[t][l] == e).unwrap();
                    let a = triangles[t][local];
                    let b = triangles[t][(local + 1) % 3];
                    let (pa, pb) = (vertices[a], vertices[b]);
                    let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
                    let len = dx.hypot(dy);
                    let tag = tags.and_then(|m| m.get(&(a.min(b), a.max(b))).copied()).unwrap_or(0);
                    boundary_edges.push(BoundaryEdge {
                        v: [a, b],
                        normal: [dy / len, -dx / len],
                        tag,
                        triangle: t,
                        local,
                    });
                    on_boundary[a] = true;
                    on_boundary[b] = true;
                }
                2 => {
                    let [t0, t1] = [tris[0], tris[1]];
                    let dir = |t: usize| {
                        let l = (0..3).find(|&l| topo.tri_edges[t][l] == e).unwrap();
                        triangles[t][l]
                    };
                    if dir(t0) == dir(t1) {
                        return Err(MeshError::NonConforming(format!(
                            "triangles {t0} and {t1} share edge {:?} with the same orientation",
                            topo.edges[e]
                        )));
                    }
                }
                n => {
                    return Err(MeshError::NonConforming(format!(
                        "edge {:?} is shared by {n} triangles",
                        topo.edges[e]
                    )))
                }
            }
        }
        // closed loops: each boundary vertex has one incoming and one outgoing edge
        let mut out_deg = vec![0u8; vertices.len()];
        let mut in_deg = vec![0u8; vertices.len()];
        for be in &boundary_edges {
            out_deg[be.v[0]] += 1;
            in_deg[be.v[1]] += 1;
        }
        for v in 0..vertices.len() {
            if on_boundary[v] && (out_deg[v] != 1 || in_deg[v] != 1) {
                return Err(MeshError::NonConforming(format!("boundary is not a simple closed loop at vertex {v}")));
            }
        }
        let used = {
            let mut u = vec![false; vertices.len()];
            triangles.iter().flatten().for_each(|&v| u[v] = true);
            u.iter().filter(|&&x| x).count()
        };
        let euler = used as i64 - topo.edges.len() as i64 + triangles.len() as i64;
        if euler != 1 {
            return Err(MeshError::NotSimplyConnected(euler));
        }
        Ok(Mesh { vertices, triangles, boundary_edges, on_boundary })
    }

    pub fn topology(&self) -> Topology {
        topology(self.vertices.len(), &self.triangles)
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        triangle_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.area(t)).sum()
    }

    /// Area enclosed by the boundary loop (shoelace).
    pub fn boundary_area(&self) -> f64 {
        self.boundary_edges
            .iter()
            .map(|e| {
                let (a, b) = (self.vertices[e.v[0]], self.vertices[e.v[1]]);
                0.5 * (a[0] * b[1] - b[0] * a[1])
            })
            .sum()
    }

    pub fn edge_length(&self, e: &BoundaryEdge) -> f64 {
        let (a, b) = (self.vertices[e.v[0]], self.vertices[e.v[1]]);
        (b[0] - a[0]).hypot(b[1] - a[1])
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_degrees(&self) -> f64 {
        let mut worst = 180.0f64;
        for tri in &self.triangles {
            for k in 0..3 {
                let p = self.vertices[tri[k]];
                let q = self.vertices[tri[(k + 1) % 3]];
                let r = self.vertices[tri[(k + 2) % 3]];
                let u = [q[0] - p[0], q[1] - p[1]];
                let v = [r[0] - p[0], r[1] - p[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
                worst = worst.min(cos.clamp(-1.0, 1.0).acos().to_degrees());
            }
        }
        worst
    }

    /// Longest edge length.
    pub fn max_edge(&self) -> f64 {
        let mut h: f64 = 0.0;
        for tri in &self.triangles {
            for k in 0..3 {
                let p = self.vertices[tri[k]];
                let q = self.vertices[tri[(k + 1) % 3]];
                h = h.max((q[0] - p[0]).hypot(q[1] - p[1]));
            }
        }
        h
    }

    /// Uniform quadrisection. New boundary midpoints are passed through
    /// `project`, interior midpoints stay at the chord midpoint.
    pub fn refine_with(
        &self,
        project: &dyn Fn([f64; 2], usize) -> Result<[f64; 2], MeshError>,
    ) -> Result<Mesh, MeshError> {
        let topo = self.topology();
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        let mut tags = HashMap::new();
        let bnd_tag: HashMap<(usize, usize), usize> = self
            .boundary_edges
            .iter()
            .map(|e| ((e.v[0].min(e.v[1]), e.v[0].max(e.v[1])), e.tag))
            .collect();
        for (e, &[a, b]) in topo.edges.iter().enumerate() {
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            let m = nv + e;
            if let Some(&tag) = bnd_tag.get(&(a, b)) {
                vertices.push(project(mid, tag)?);
                tags.insert((a.min(m), a.max(m)), tag);
                tags.insert((b.min(m), b.max(m)), tag);
            } else {
                vertices.push(mid);
            }
        }
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for (t, &[a, b, c]) in self.triangles.iter().enumerate() {
            let [eab, ebc, eca] = topo.tri_edges[t];
            let (mab, mbc, mca) = (nv + eab, nv + ebc, nv + eca);
            triangles.push([a, mab, mca]);
            triangles.push([mab, b, mbc]);
            triangles.push([mca, mbc, c]);
            triangles.push([mab, mbc, mca]);
        }
        Mesh::from_parts(vertices, triangles, Some(&tags))
    }

    /// Refinement without boundary projection (exact for polygons).
    pub fn refine_straight(&self) -> Result<Mesh, MeshError> {
        self.refine_with(&|p, _| Ok(p))
    }

    pub fn to_json(&self) -> String {
        let mut s = String::from("{\n  \"vertices\": [");
        for (i, v) in self.vertices.iter().enumerate() {
            let sep = if i == 0 { "\n    " } else { ",\n    " };
            let _ = write!(s, "{sep}[{:.16e}, {:.16e}]", v[0], v[1]);
        }
        s.push_str("\n  ],\n  \"triangles\": [");
        for (i, t) in self.triangles.iter().enumerate() {
            let sep = if i == 0 { "\n    " } else { ",\n    " };
            let _ = write!(s, "{sep}[{}, {}, {}]", t[0], t[1], t[2]);
        }
        s.push_str("\n  ],\n  \"boundary_edges\": [");
        for (i, e) in self.boundary_edges.iter().enumerate() {
            let sep = if i == 0 { "\n    " } else { ",\n    " };
            let _ = write!(s, "{sep}[{}, {}]", e.v[0], e.v[1]);
        }
        s.push_str("\n  ]\n}\n");
        s
    }

    pub fn from_json(text: &str) -> Result<Mesh, MeshError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct MeshFile {
            vertices: Vec<[f64; 2]>,
            triangles: Vec<[usize; 3]>,
            boundary_edges: Option<Vec<[usize; 2]>>,
        }
        let file: MeshFile = serde_json::from_str(text)
            .map_err(|e| MeshError::Malformed { line: e.line(), message: e.to_string() })?;
        let mesh = Mesh::from_parts(file.vertices, file.triangles, None)?;
        if let Some(listed) = file.boundary_edges {
            check_listed_boundary(&mesh, &listed)?;
        }
        Ok(mesh)
    }

    /// Gmsh MSH 2.2 ASCII: nodes, 2-node lines and 3-node triangles.
    pub fn from_msh(text: &str) -> Result<Mesh, MeshError> {
        let lines: Vec<&str> = text.lines().collect();
        let mut i = 0;
        let mut ids: HashMap<usize, usize> = HashMap::new();
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let mut lines_el: Vec<([usize; 2], usize)> = Vec::new();
        let bad = |line: usize, message: &str| MeshError::Malformed { line: line + 1, message: message.to_string() };
        let mut saw_format = false;
        while i < lines.len() {
            match lines[i].trim() {
                "$MeshFormat" => {
                    let v = lines.get(i + 1).ok_or_else(|| bad(i, "missing format line"))?;
                    let mut parts = v.split_whitespace();
                    let version: f64 = parts.next().and_then(|x| x.parse().ok()).ok_or_else(|| bad(i + 1, "bad version"))?;
                    let ftype: usize = parts.next().and_then(|x| x.parse().ok()).ok_or_else(|| bad(i + 1, "bad file type"))?;
                    if !(2.0..3.0).contains(&version) || ftype != 0 {
                        return Err(bad(i + 1, "only ASCII MSH 2.x is supported"));
                    }
                    saw_format = true;
                    i += 2;
                }
                "$Nodes" => {
                    let n: usize = lines.get(i + 1).and_then(|l| l.trim().parse().ok()).ok_or_else(|| bad(i + 1, "bad node count"))?;
                    for k in 0..n {
                        let ln = i + 2 + k;
                        let l = lines.get(ln).ok_or_else(|| bad(ln, "truncated node block"))?;
                        let f: Vec<&str> = l.split_whitespace().collect();
                        if f.len() < 3 {
                            return Err(bad(ln, "node line needs id x y [z]"));
                        }
                        let id: usize = f[0].parse().map_err(|_| bad(ln, "bad node id"))?;
                        let x: f64 = f[1].parse().map_err(|_| bad(ln, "bad x coordinate"))?;
                        let y: f64 = f[2].parse().map_err(|_| bad(ln, "bad y coordinate"))?;
                        ids.insert(id, vertices.len());
                        vertices.push([x, y]);
                    }
                    i += n + 2;
                }
                "$Elements" => {
                    let n: usize = lines.get(i + 1).and_then(|l| l.trim().parse().ok()).ok_or_else(|| bad(i + 1, "bad element count"))?;
                    for k in 0..n {
                        let ln = i + 2 + k;
                        let l = lines.get(ln).ok_or_else(|| bad(ln, "truncated element block"))?;
                        let f: Vec<usize> = l
                            .split_whitespace()
                            .map(|x| x.parse().map_err(|_| bad(ln, "non-integer element field")))
                            .collect::<Result<_, _>>()?;
                        if f.len() < 3 {
                            return Err(bad(ln, "element line too short"));
                        }
                        let (id, kind, ntags) = (f[0], f[1], f[2]);
                        let tag = if ntags > 0 { f.get(3).copied().unwrap_or(0) } else { 0 };
                        let nodes = &f[(3 + ntags).min(f.len())..];
                        let node = |j: usize| -> Result<usize, MeshError> {
                            let raw = *nodes.get(j).ok_or_else(|| bad(ln, "missing element node"))?;
                            ids.get(&raw).copied().ok_or_else(|| bad(ln, "element references unknown node"))
                        };
                        match kind {
                            15 => {}
                            1 => lines_el.push(([node(0)?, node(1)?], tag)),
                            2 => {
                                let mut t = [node(0)?, node(1)?, node(2)?];
                                if triangle_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]) < 0.0 {
                                    t.swap(1, 2);
                                }
                                triangles.push(t);
                            }
                            other => {
                                return Err(MeshError::UnsupportedElement { element: id, kind: other, line: ln + 1 })
                            }
                        }
                    }
                    i += n + 2;
                }
                _ => i += 1,
            }
        }
        if !saw_format {
            return Err(bad(0, "missing $MeshFormat section"));
        }
        let tags: HashMap<(usize, usize), usize> =
            lines_el.iter().map(|([a, b], t)| ((*a.min(b), *a.max(b)), *t)).collect();
        let mesh = Mesh::from_parts(vertices, triangles, Some(&tags))?;
        if !lines_el.is_empty() {
            let listed: Vec<[usize; 2]> = lines_el.iter().map(|(e, _)| *e).collect();
            check_listed_boundary(&mesh, &listed)?;
        }
        Ok(mesh)
    }

    pub fn import(path: &Path) -> Result<Mesh, MeshError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| MeshError::Io { path: path.display().to_string(), source })?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("msh") => Mesh::from_msh(&text),
            _ => Mesh::from_json(&text),
        }
    }

    pub fn export(&self, path: &Path) -> Result<(), MeshError> {
        std::fs::write(path, self.to_json()).map_err(|source| MeshError::Io { path: path.display().to_string(), source })
    }
}

fn check_listed_boundary(mesh: &Mesh, listed: &[[usize; 2]]) -> Result<(), MeshError> {
    let mut derived: Vec<(usize, usize)> =
        mesh.boundary_edges.iter().map(|e| (e.v[0].min(e.v[1]), e.v[0].max(e.v[1]))).collect();
    let mut given: Vec<(usize, usize)> = listed.iter().map(|e| (e[0].min(e[1]), e[0].max(e[1]))).collect();
    derived.sort_unstable();
    given.sort_unstable();
    if derived != given {
        return Err(MeshError::NonConforming(format!(
            "listed boundary edges ({}) disagree with triangle adjacency ({})",
            given.len(),
            derived.len()
        )));
    }
    Ok(())
}

/// Structured mesh of `[0, w] x [0, h]` with `2 nx ny` triangles.
pub fn mesh_rectangle(width: f64, height: f64, nx: usize, ny: usize) -> Result<Mesh, MeshError> {
    if !(width > 0.0 && height > 0.0) || nx == 0 || ny == 0 {
        return Err(MeshError::InvalidParameter(format!("rectangle {width}x{height} with {nx}x{ny} cells")));
    }
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([width * i as f64 / nx as f64, height * j as f64 / ny as f64]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Mesh::from_parts(vertices, triangles, None)
}

/// Projects onto the circle of the given center and radius.
pub fn project_circle(p: [f64; 2], center: [f64; 2], radius: f64) -> [f64; 2] {
    let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
    let r = dx.hypot(dy);
    [center[0] + radius * dx / r, center[1] + radius * dy / r]
}

/// Hexagonal fan refined `level` times with boundary midpoints projected
/// onto the circle.
pub fn mesh_disk(radius: f64, level: usize) -> Result<Mesh, MeshError> {
    mesh_disk_at([0.0, 0.0], radius, level)
}

pub fn mesh_disk_at(center: [f64; 2], radius: f64, level: usize) -> Result<Mesh, MeshError> {
    if !(radius > 0.0) {
        return Err(MeshError::InvalidParameter(format!("disk radius {radius}")));
    }
    let ring: Vec<[f64; 2]> = (0..6)
        .map(|k| {
            let a = std::f64::consts::PI * k as f64 / 3.0;
            [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
        })
        .collect();
    let mut mesh = mesh_fan(center, &ring)?;
    for _ in 0..level {
        mesh = mesh.refine_with(&|p, _| Ok(project_circle(p, center, radius)))?;
    }
    Ok(mesh)
}

/// Fan triangulation of a counterclockwise polygon around an interior point
/// that sees every vertex.
pub fn mesh_fan(center: [f64; 2], polygon: &[[f64; 2]]) -> Result<Mesh, MeshError> {
    let n = polygon.len();
    if n < 3 {
        return Err(MeshError::InvalidParameter("polygon needs at least 3 vertices".into()));
    }
    let mut vertices = vec![center];
    vertices.extend_from_slice(polygon);
    let triangles = (0..n).map(|k| [0, 1 + k, 1 + (k + 1) % n]).collect();
    Mesh::from_parts(vertices, triangles, None)
}

/// Ear-clipping triangulation of a simple counterclockwise polygon.
pub fn mesh_polygon(polygon: &[[f64; 2]]) -> Result<Mesh, MeshError> {
    let n = polygon.len();
    if n < 3 {
        return Err(MeshError::InvalidParameter("polygon needs at least 3 vertices".into()));
    }
    let signed: f64 = (0..n)
        .map(|i| {
            let (a, b) = (polygon[i], polygon[(i + 1) % n]);
            0.5 * (a[0] * b[1] - b[0] * a[1])
        })
        .sum();
    if !(signed > 0.0) {
        return Err(MeshError::InvalidParameter("polygon must be counterclockwise".into()));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut triangles = Vec::new();
    let mut guard = 0;
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for k in 0..m {
            let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            let (a, b, c) = (polygon[ia], polygon[ib], polygon[ic]);
            if triangle_area(a, b, c) <= 0.0 {
                continue;
            }
            let inside = idx.iter().any(|&j| {
                j != ia && j != ib && j != ic && {
                    let p = polygon[j];
                    triangle_area(a, b, p) >= 0.0 && triangle_area(b, c, p) >= 0.0 && triangle_area(c, a, p) >= 0.0
                }
            });
            if !inside {
                triangles.push([ia, ib, ic]);
                idx.remove(k);
                clipped = true;
                break;
            }
        }
        guard += 1;
        if !clipped || guard > 10 * n {
            return Err(MeshError::InvalidParameter("polygon is not simple".into()));
        }
    }
    triangles.push([idx[0], idx[1], idx[2]]);
    Mesh::from_parts(polygon.to_vec(), triangles, None)
}
