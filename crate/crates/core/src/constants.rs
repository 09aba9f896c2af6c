//! Riccati comparison function `H_kappa` and the curvature comparison
//! constants `C_0 .. C_3`.
//!
//! Everything is expressed through `r H_kappa(r)`, which is smooth in
//! `kappa r^2`, equals `n - 1` at `r = 0`, and is increasing for `kappa < 0`,
//! constant for `kappa = 0`, decreasing for `kappa > 0`.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConstantsError {
    #[error("dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("kappa1 = {kappa1} exceeds kappa2 = {kappa2}")]
    CurvatureOrder { kappa1: f64, kappa2: f64 },
    #[error("radius {r} outside the admissible range (0, {limit})")]
    Radius { r: f64, limit: f64 },
    #[error("non-finite input")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureData {
    pub n: usize,
    pub kappa1: f64,
    pub kappa2: f64,
    pub r_max: f64,
}

impl CurvatureData {
    pub fn new(n: usize, kappa1: f64, kappa2: f64, r_max: f64) -> Result<Self, ConstantsError> {
        if n < 2 {
            return Err(ConstantsError::Dimension(n));
        }
        if !(kappa1.is_finite() && kappa2.is_finite() && r_max.is_finite()) {
            return Err(ConstantsError::NonFinite);
        }
        if kappa1 > kappa2 {
            return Err(ConstantsError::CurvatureOrder { kappa1, kappa2 });
        }
        let limit = admissible_radius(kappa2);
        if !(r_max > 0.0 && r_max < limit) {
            return Err(ConstantsError::Radius { r: r_max, limit });
        }
        Ok(Self { n, kappa1, kappa2, r_max })
    }

    /// Both curvature bounds equal, as for the constant-curvature models.
    pub fn constant(n: usize, kappa: f64, r_max: f64) -> Result<Self, ConstantsError> {
        Self::new(n, kappa, kappa, r_max)
    }
}

/// Upper end of the Hessian comparison window: `pi / (2 sqrt(kappa))` for
/// `kappa > 0`, unbounded otherwise.
pub fn admissible_radius(kappa: f64) -> f64 {
    if kappa > 0.0 {
        PI / (2.0 * kappa.sqrt())
    } else {
        f64::INFINITY
    }
}

/// `r H_kappa(r)` for `r >= 0`; equals `n - 1` at `r = 0`.
pub fn r_h(n: usize, kappa: f64, r: f64) -> f64 {
    let m = (n - 1) as f64;
    let s = kappa * r * r;
    if s.abs() < 1e-2 {
        // x cot x as a series in s = x^2 (covers both signs of kappa)
        return m * (1.0 - s / 3.0 - s * s / 45.0 - 2.0 * s.powi(3) / 945.0 - s.powi(4) / 4725.0);
    }
    let x = s.abs().sqrt();
    if kappa > 0.0 {
        m * x / x.tan()
    } else {
        m * x / x.tanh()
    }
}

/// Closed form of `H_kappa(r)`: `(n-1) sqrt(k) cot(sqrt(k) r)`, `(n-1)/r` or
/// `(n-1) sqrt(|k|) coth(sqrt(|k|) r)`.
pub fn h_kappa(n: usize, kappa: f64, r: f64) -> Result<f64, ConstantsError> {
    if n < 2 {
        return Err(ConstantsError::Dimension(n));
    }
    let limit = if kappa > 0.0 { PI / kappa.sqrt() } else { f64::INFINITY };
    if !(r > 0.0 && r < limit) {
        return Err(ConstantsError::Radius { r, limit });
    }
    Ok(r_h(n, kappa, r) / r)
}

/// Residual of `h' + h^2 + kappa = 0` for `h = H_kappa / (n - 1)`, with a
/// central difference for `h'`. For `n = 2` this is `H' + H^2 + kappa`.
pub fn riccati_residual(n: usize, kappa: f64, r: f64) -> Result<f64, ConstantsError> {
    let m = (n - 1) as f64;
    let step = 1e-5 * r;
    let hp = (h_kappa(n, kappa, r + step)? - h_kappa(n, kappa, r - step)?) / (2.0 * step) / m;
    let h = h_kappa(n, kappa, r)? / m;
    Ok(hp + h * h + kappa)
}

/// `max` of `r H_kappa(r)` over `[0, r_max]`, using monotonicity.
pub fn max_r_h(n: usize, kappa: f64, r_max: f64) -> f64 {
    if kappa < 0.0 {
        r_h(n, kappa, r_max)
    } else {
        (n - 1) as f64
    }
}

/// `min` of `r H_kappa(r)` over `[0, r_max]`, using monotonicity.
pub fn min_r_h(n: usize, kappa: f64, r_max: f64) -> f64 {
    if kappa > 0.0 {
        r_h(n, kappa, r_max)
    } else {
        (n - 1) as f64
    }
}

/// `C_0 = 1 + max_{(0, r_max]} r H_kappa(r)`.
pub fn c0(n: usize, kappa: f64, r_max: f64) -> f64 {
    1.0 + max_r_h(n, kappa, r_max)
}

/// `C_1 = (1 + 2/(n-1)) min r H_{kappa2} - max r H_{kappa1}`.
pub fn c1(d: &CurvatureData) -> f64 {
    let m = (d.n - 1) as f64;
    (1.0 + 2.0 / m) * min_r_h(d.n, d.kappa2, d.r_max) - max_r_h(d.n, d.kappa1, d.r_max)
}

/// `C_2 = 1 + min r H_{kappa2} - 2 max r H_{kappa1} / (n-1)`.
pub fn c2(d: &CurvatureData) -> f64 {
    let m = (d.n - 1) as f64;
    1.0 + min_r_h(d.n, d.kappa2, d.r_max) - 2.0 * max_r_h(d.n, d.kappa1, d.r_max) / m
}

/// `C_3 = n + 1 - r_max H_{kappa1}(r_max)`.
pub fn c3(n: usize, kappa1: f64, r_max: f64) -> f64 {
    (n + 1) as f64 - r_h(n, kappa1, r_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Which {
    C1,
    C2,
    C3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PositivityRadius {
    /// Positive for every admissible `r_max`.
    Unbounded,
    /// Positive exactly for `r_max < r_0`.
    Finite(f64),
    /// Not positive even as `r_max -> 0`.
    NeverPositive,
}

/// Radius `r_0` below which the chosen constant is positive. `C_1` and `C_2`
/// are nonincreasing in `r_max`, as is `C_3` for `kappa1 <= 0`, so the sign
/// change is found by bisection. For `kappa1 > 0`, `C_3 >= 2` on the whole
/// comparison window.
pub fn positivity_radius(which: Which, n: usize, kappa1: f64, kappa2: f64) -> PositivityRadius {
    if which == Which::C3 && kappa1 > 0.0 {
        return PositivityRadius::Unbounded;
    }
    let eval = |r: f64| -> f64 {
        let d = CurvatureData { n, kappa1, kappa2, r_max: r };
        match which {
            Which::C1 => c1(&d),
            Which::C2 => c2(&d),
            Which::C3 => c3(n, kappa1, r),
        }
    };
    let limit = match which {
        Which::C3 => f64::INFINITY,
        _ => admissible_radius(kappa2),
    };
    let tiny = 1e-9 * if limit.is_finite() { limit } else { 1.0 };
    if eval(tiny) <= 0.0 {
        return PositivityRadius::NeverPositive;
    }
    let mut lo = tiny;
    let mut hi;
    if limit.is_finite() {
        hi = limit * (1.0 - 1e-12);
        if eval(hi) > 0.0 {
            return PositivityRadius::Unbounded;
        }
    } else {
        // grow until the constant turns nonpositive
        let scale = 1.0 / kappa1.abs().max(kappa2.abs()).max(1e-300).sqrt();
        hi = scale.min(1.0);
        while eval(hi) > 0.0 {
            lo = hi;
            hi *= 2.0;
            if hi > 1e6 * scale.max(1.0) {
                return PositivityRadius::Unbounded;
            }
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if eval(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    PositivityRadius::Finite(0.5 * (lo + hi))
}

/// All constants for one curvature configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonConstants {
    pub data: CurvatureData,
    pub h_at_r_max: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl ComparisonConstants {
    pub fn evaluate(data: CurvatureData) -> Self {
        Self {
            data,
            h_at_r_max: r_h(data.n, data.kappa1, data.r_max) / data.r_max,
            c0: c0(data.n, data.kappa1, data.r_max),
            c1: c1(&data),
            c2: c2(&data),
            c3: c3(data.n, data.kappa1, data.r_max),
        }
    }
}
