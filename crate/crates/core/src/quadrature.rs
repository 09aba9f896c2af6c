//! Quadrature on the reference triangle and the reference edge `[0, 1]`.
//! Weights are normalized to sum to one on both.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuadratureError {
    #[error("no shipped {kind} rule of degree {degree} (available: {available})")]
    Unsupported { kind: &'static str, degree: usize, available: &'static str },
}

#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub degree: usize,
    /// Barycentric coordinates.
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct EdgeRule {
    pub degree: usize,
    /// Parameters in `[0, 1]`.
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Smallest shipped triangle rule exact to at least `degree` (2, 4 or 7).
pub fn triangle_rule(degree: usize) -> Result<TriangleRule, QuadratureError> {
    match degree {
        0..=2 => Ok(degree2()),
        3..=4 => Ok(degree4()),
        5..=7 => Ok(degree7()),
        _ => Err(QuadratureError::Unsupported { kind: "triangle", degree, available: "2, 4, 7" }),
    }
}

/// Gauss-Legendre edge rule exact to at least `degree` (2, 4 or 9).
pub fn edge_rule(degree: usize) -> Result<EdgeRule, QuadratureError> {
    let npts = match degree {
        0..=3 => 2,
        4..=5 => 3,
        6..=9 => 5,
        _ => return Err(QuadratureError::Unsupported { kind: "edge", degree, available: "2, 4, 9" }),
    };
    let (x, w) = gauss_legendre(npts);
    Ok(EdgeRule {
        degree: 2 * npts - 1,
        points: x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        weights: w.iter().map(|w| 0.5 * w).collect(),
    })
}

fn degree2() -> TriangleRule {
    let a = 1.0 / 6.0;
    let b = 2.0 / 3.0;
    TriangleRule {
        degree: 2,
        points: vec![[b, a, a], [a, b, a], [a, a, b]],
        weights: vec![1.0 / 3.0; 3],
    }
}

/// Six-point symmetric rule with closed-form nodes.
fn degree4() -> TriangleRule {
    let s10 = 10f64.sqrt();
    let r = (38.0 - 44.0 * (2.0f64 / 5.0).sqrt()).sqrt();
    let a = (8.0 - s10 + r) / 18.0;
    let b = (8.0 - s10 - r) / 18.0;
    let q = (213125.0 - 53320.0 * s10).sqrt();
    let wa = (620.0 + q) / 3720.0;
    let wb = (620.0 - q) / 3720.0;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (c, w) in [(a, wa), (b, wb)] {
        let d = 1.0 - 2.0 * c;
        points.extend([[d, c, c], [c, d, c], [c, c, d]]);
        weights.extend([w, w, w]);
    }
    TriangleRule { degree: 4, points, weights }
}

/// Collapsed 5x5 Gauss-Legendre product rule. Exact for total degree 7
/// (in fact 8) with strictly positive weights.
fn degree7() -> TriangleRule {
    let (x, w) = gauss_legendre(5);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for i in 0..5 {
        let u = 0.5 * (x[i] + 1.0);
        let wu = 0.5 * w[i];
        for j in 0..5 {
            let v = 0.5 * (x[j] + 1.0);
            let wv = 0.5 * w[j];
            let px = u;
            let py = v * (1.0 - u);
            points.push([1.0 - px - py, px, py]);
            // reference area 1/2 is divided out
            weights.push(2.0 * wu * wv * (1.0 - u));
        }
    }
    TriangleRule { degree: 7, points, weights }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, t);
        x[n - 1 - i] = t;
        w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

fn legendre(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, dp)
}
