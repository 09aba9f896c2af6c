use proptest::prelude::*;

use speclab_core::constants::{c1, c2, c3, r_h, riccati_residual, CurvatureData};
use speclab_core::eigen::cluster;
use speclab_core::geometry::{geometric_quantities, Domain};
use speclab_core::harness::{InequalityCheck, Relation, Verdict};
use speclab_oracle::grid_constants;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clusters_partition_sorted_values(mut values in prop::collection::vec(0.0f64..50.0, 1..30), tol in 1e-6f64..1e-1) {
        values.sort_by(f64::total_cmp);
        let clusters = cluster(&values, tol);
        let mut next = 0;
        for c in &clusters {
            prop_assert_eq!(c.start, next);
            prop_assert!(c.multiplicity >= 1);
            for i in c.start + 1..c.start + c.multiplicity {
                prop_assert!(values[i] - values[i - 1] <= tol * values[i].abs().max(1.0));
            }
            next += c.multiplicity;
        }
        prop_assert_eq!(next, values.len());
        for w in clusters.windows(2) {
            let s = w[1].start;
            prop_assert!(values[s] - values[s - 1] > tol * values[s].abs().max(1.0));
        }
    }

    #[test]
    fn r_h_monotone_by_curvature_sign(n in 2usize..6, kappa in -4.0f64..4.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let limit = if kappa > 0.0 { 0.99 * std::f64::consts::PI / kappa.sqrt() } else { 3.0 };
        let (lo, hi) = if a <= b { (a * limit, b * limit) } else { (b * limit, a * limit) };
        let (f_lo, f_hi) = (r_h(n, kappa, lo), r_h(n, kappa, hi));
        let tol = 1e-12 * f_lo.abs().max(1.0);
        if kappa < 0.0 {
            prop_assert!(f_hi >= f_lo - tol);
        } else if kappa > 0.0 {
            prop_assert!(f_hi <= f_lo + tol);
        } else {
            prop_assert_eq!(f_lo, f_hi);
        }
    }

    #[test]
    fn riccati_at_random_radii(n in 2usize..6, kappa in -4.0f64..4.0, t in 0.02f64..0.9) {
        let limit = if kappa > 0.0 { std::f64::consts::PI / kappa.sqrt() } else { 4.0 };
        let r = t * limit;
        let h = r_h(n, kappa, r) / r / (n - 1) as f64;
        prop_assert!(riccati_residual(n, kappa, r).unwrap().abs() <= 1e-6 * (1.0 + h * h));
    }

    #[test]
    fn constants_continuous_across_flat(n in 2usize..5, r in 0.1f64..2.0) {
        let flat = CurvatureData::constant(n, 0.0, r).unwrap();
        for eps in [1e-9, -1e-9] {
            let near = CurvatureData::constant(n, eps, r).unwrap();
            prop_assert!((c1(&near) - c1(&flat)).abs() < 1e-6);
            prop_assert!((c2(&near) - c2(&flat)).abs() < 1e-6);
            prop_assert!((c3(n, eps, r) - c3(n, 0.0, r)).abs() < 1e-6);
        }
    }

    #[test]
    fn constants_nonincreasing_in_radius(n in 2usize..5, k1 in -3.0f64..0.5, dk in 0.0f64..2.0, a in 0.01f64..0.95, b in 0.01f64..0.95) {
        let k2 = k1 + dk;
        let limit = if k2 > 0.0 { std::f64::consts::FRAC_PI_2 / k2.sqrt() } else { 3.0 };
        let (lo, hi) = if a <= b { (a * limit, b * limit) } else { (b * limit, a * limit) };
        let d_lo = CurvatureData::new(n, k1, k2, lo).unwrap();
        let d_hi = CurvatureData::new(n, k1, k2, hi).unwrap();
        prop_assert!(c1(&d_hi) <= c1(&d_lo) + 1e-12);
        prop_assert!(c2(&d_hi) <= c2(&d_lo) + 1e-12);
        if k1 <= 0.0 {
            prop_assert!(c3(n, k1, hi) <= c3(n, k1, lo) + 1e-12);
        } else {
            prop_assert!(c3(n, k1, hi) >= c3(n, k1, lo) - 1e-12);
        }
    }

    #[test]
    fn constants_agree_with_grid(n in 2usize..5, k1 in -3.0f64..1.0, dk in 0.0f64..2.0, t in 0.05f64..0.95) {
        let k2 = k1 + dk;
        let limit = if k2 > 0.0 { std::f64::consts::FRAC_PI_2 / k2.sqrt() } else { 3.0 };
        let r = t * limit;
        let d = CurvatureData::new(n, k1, k2, r).unwrap();
        let grid = grid_constants(n, k1, k2, r, 1000);
        prop_assert!((c1(&d) - grid[1]).abs() <= 1e-9);
        prop_assert!((c2(&d) - grid[2]).abs() <= 1e-9);
        prop_assert!((c3(n, k1, r) - grid[3]).abs() <= 1e-9);
    }

    #[test]
    fn widening_slack_never_breaks_a_pass(lhs in -10.0f64..10.0, rhs in -10.0f64..10.0, s in 0.0f64..0.1, extra in 0.0f64..0.1, ge in any::<bool>()) {
        let relation = if ge { Relation::Ge } else { Relation::Le };
        let tight = InequalityCheck::compare("t".into(), "", relation, lhs, rhs, &[lhs, rhs], s);
        let loose = InequalityCheck::compare("t".into(), "", relation, lhs, rhs, &[lhs, rhs], s + extra);
        if tight.verdict == Verdict::Pass {
            prop_assert_eq!(loose.verdict, Verdict::Pass);
        }
        let exact = match relation {
            Relation::Le => lhs <= rhs,
            Relation::Ge => lhs >= rhs,
        };
        if exact {
            prop_assert_eq!(tight.verdict, Verdict::Pass);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn support_function_bounded_by_distance(a in 0.5f64..2.0, b in 0.5f64..2.0) {
        let domain = Domain::ellipse(a, b).unwrap();
        let mesh = domain.mesh(2).unwrap();
        let g = geometric_quantities(&domain, &mesh).unwrap();
        prop_assert!(g.h_min > 0.0);
        prop_assert!(g.h_min <= g.h_max + 1e-12);
        prop_assert!(g.h_max <= g.r_max + 1e-12);
        prop_assert!(g.star_shaped);
    }

    #[test]
    fn translation_keeps_star_shape(dx in -3.0f64..3.0, dy in -3.0f64..3.0) {
        let domain = Domain::disk_at([dx, dy], 1.0).unwrap();
        let mesh = domain.mesh(2).unwrap();
        let g = geometric_quantities(&domain, &mesh).unwrap();
        prop_assert!(g.star_shaped);
        prop_assert!((g.r_max - 1.0).abs() < 1e-12);
    }
}
