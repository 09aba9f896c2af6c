//! Brute-force comparison constants: the closed form of `r H_kappa(r)` is
//! sampled on a uniform grid instead of relying on monotonicity.

/// `r H_kappa(r)` from `cot`/`coth` directly, with the `r -> 0` limit.
pub fn r_h_closed(n: usize, kappa: f64, r: f64) -> f64 {
    let m = (n - 1) as f64;
    if r == 0.0 || kappa == 0.0 {
        return m;
    }
    let x = kappa.abs().sqrt() * r;
    if kappa > 0.0 {
        m * x * x.cos() / x.sin()
    } else {
        m * x * x.cosh() / x.sinh()
    }
}

/// `[C0, C1, C2, C3]` with the extrema over `[0, r_max]` taken on `points`
/// equally spaced samples.
pub fn grid_constants(n: usize, kappa1: f64, kappa2: f64, r_max: f64, points: usize) -> [f64; 4] {
    let m = (n - 1) as f64;
    let mut max1 = f64::NEG_INFINITY;
    let mut min2 = f64::INFINITY;
    for i in 0..points {
        let r = r_max * i as f64 / (points - 1) as f64;
        max1 = max1.max(r_h_closed(n, kappa1, r));
        min2 = min2.min(r_h_closed(n, kappa2, r));
    }
    [
        1.0 + max1,
        (1.0 + 2.0 / m) * min2 - max1,
        1.0 + min2 - 2.0 * max1 / m,
        (n + 1) as f64 - r_h_closed(n, kappa1, r_max),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_plane() {
        assert_eq!(grid_constants(2, 0.0, 0.0, 1.7, 11), [2.0, 2.0, 0.0, 2.0]);
    }

    #[test]
    fn small_radius_limit() {
        assert!((r_h_closed(3, -1.0, 1e-6) - 2.0).abs() < 1e-10);
        assert!((r_h_closed(3, 1.0, 1e-6) - 2.0).abs() < 1e-10);
    }
}
