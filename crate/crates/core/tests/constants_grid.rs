//! Comparison constants against brute-force grid sampling of the defining
//! min/max expressions.

use speclab_core::constants::{c0, c1, c2, c3, h_kappa, riccati_residual, CurvatureData, ComparisonConstants};
use speclab_oracle::grid_constants;

/// (n, kappa1, kappa2, r_max): flat, both nonpositive, both nonnegative,
/// and mixed signs.
const TUPLES: [(usize, f64, f64, f64); 12] = [
    (2, 0.0, 0.0, 1.0),
    (3, 0.0, 0.0, 2.5),
    (4, 0.0, 0.0, 0.3),
    (2, -1.0, -1.0, 1.0),
    (3, -4.0, -0.5, 0.8),
    (2, -0.25, 0.0, 3.0),
    (2, 1.0, 1.0, 0.5),
    (3, 0.5, 2.0, 1.0),
    (2, 0.0, 4.0, 0.7),
    (2, -1.0, 1.0, 0.3),
    (3, -2.0, 0.5, 1.2),
    (5, -0.1, 3.0, 0.9),
];

#[test]
fn constants_match_grid_sampling() {
    for (n, k1, k2, r) in TUPLES {
        let data = CurvatureData::new(n, k1, k2, r).unwrap();
        let c = ComparisonConstants::evaluate(data);
        let grid = grid_constants(n, k1, k2, r, 10_000);
        let ours = [c.c0, c.c1, c.c2, c.c3];
        for i in 0..4 {
            assert!((ours[i] - grid[i]).abs() <= 1e-9, "C{i} for {:?}: {} vs {}", (n, k1, k2, r), ours[i], grid[i]);
        }
    }
}

#[test]
fn flat_plane_values_are_exact() {
    let d = CurvatureData::constant(2, 0.0, 1.0).unwrap();
    assert_eq!((c0(2, 0.0, 1.0), c1(&d), c2(&d), c3(2, 0.0, 1.0)), (2.0, 2.0, 0.0, 2.0));
    for n in 2..6 {
        let d = CurvatureData::constant(n, 0.0, 1.0).unwrap();
        assert_eq!(c2(&d), n as f64 - 2.0);
    }
}

#[test]
fn riccati_holds_pointwise() {
    for (n, kappa, limit) in [(2, 0.0, 5.0), (3, -1.0, 5.0), (2, 1.0, 3.0), (4, -0.3, 5.0), (2, 4.0, 1.5)] {
        for i in 1..=100 {
            let r = limit * i as f64 / 101.0;
            let res = riccati_residual(n, kappa, r).unwrap();
            let h = h_kappa(n, kappa, r).unwrap() / (n - 1) as f64;
            assert!(res.abs() <= 1e-6 * (1.0 + h * h), "n={n} kappa={kappa} r={r}: {res}");
        }
    }
}
