use std::collections::HashMap;

use speclab_core::eigen::SolverOptions;
use speclab_core::geometry::Domain;
use speclab_core::mesh::Mesh;
use speclab_core::problems::{solve, Discretization, ProblemKind};
use speclab_core::rellich::{
    boundary_formula_buckling, boundary_formula_clamped, refinement_slope, rellich_residual, support_flux_identity,
    AnalyticField, FemField, QuadratureOptions, Scenario, VectorField, RELLICH_TERMS,
};

fn relabel(mesh: &Mesh) -> Mesh {
    let triangles: Vec<[usize; 3]> = mesh.triangles.iter().rev().map(|t| [t[2], t[0], t[1]]).collect();
    let tags: HashMap<(usize, usize), usize> =
        mesh.boundary_edges.iter().map(|e| ((e.v[0].min(e.v[1]), e.v[0].max(e.v[1])), e.tag)).collect();
    Mesh::from_parts(mesh.vertices.clone(), triangles, Some(&tags)).unwrap()
}

#[test]
fn analytic_square_scenarios_are_exact() {
    let q = QuadratureOptions::default();
    for s in [Scenario::SineSquare, Scenario::QuarticSquare, Scenario::LinearPairSquare] {
        for level in 0..3 {
            let r = s.run(level, &q).unwrap();
            let scale = r.rhs_terms.values().map(|v| v.abs()).sum::<f64>().max(1.0);
            assert!(r.residual < 1e-10 * scale, "{} L{level}: {r:?}", s.name());
        }
    }
}

#[test]
fn saddle_on_disk_converges_at_second_order() {
    let q = QuadratureOptions::default();
    let residuals: Vec<f64> = (1..=4).map(|l| Scenario::SaddleDiskLambda.run(l, &q).unwrap().relative_residual).collect();
    let slope = refinement_slope(&residuals).unwrap();
    assert!(slope >= 1.8, "{residuals:?} slope {slope}");
}

#[test]
fn terms_are_invariant_under_relabelling() {
    let domain = Domain::disk(1.0).unwrap();
    let mesh = domain.mesh(3).unwrap();
    let q = QuadratureOptions::default();
    let f = VectorField::position([0.1, -0.05]);
    let w = AnalyticField::saddle();
    let a = rellich_residual(&domain, &mesh, &w, &f, 1.0, &q).unwrap();
    let b = rellich_residual(&domain, &relabel(&mesh), &w, &f, 1.0, &q).unwrap();
    assert_eq!(a.rhs_terms.len(), RELLICH_TERMS.len());
    let scale = a.rhs_terms.values().fold(a.lhs.abs(), |m, v| m.max(v.abs()));
    assert!((a.lhs - b.lhs).abs() <= 1e-12 * scale);
    for (name, va) in &a.rhs_terms {
        let vb = b.rhs_terms[name];
        assert!((va - vb).abs() <= 1e-12 * scale, "{name}: {va} vs {vb}");
    }
}

#[test]
fn buckling_eigenfunction_residual_decreases() {
    let q = QuadratureOptions::default();
    let residuals: Vec<f64> = (1..=4).map(|l| Scenario::BucklingDisk.run(l, &q).unwrap().relative_residual).collect();
    assert!(residuals.windows(2).all(|w| w[1] < w[0]), "{residuals:?}");
}

#[test]
fn support_flux_identity_tends_to_zero() {
    let domain = Domain::disk(1.0).unwrap();
    let q = QuadratureOptions::default();
    let residuals: Vec<f64> = (2..=4)
        .map(|l| {
            let disc = Discretization::new(&domain, &domain.mesh(l).unwrap(), 2, 4).unwrap();
            let r = solve(ProblemKind::Dirichlet, &disc, 1, &SolverOptions::default()).unwrap();
            let u = FemField::new("u_1", &disc.space, domain.metric, &r.eigen.vectors[0]);
            support_flux_identity(&domain, &disc.space.mesh, &u, r.value(1), &q).unwrap().relative_residual
        })
        .collect();
    assert!(residuals.windows(2).all(|w| w[1] < w[0]), "{residuals:?}");
    assert!(residuals[2] < 1e-2);
}

#[test]
fn boundary_formulas_approach_one() {
    for domain in [Domain::disk(1.0).unwrap(), Domain::square(1.0).unwrap()] {
        let disc = Discretization::new(&domain, &domain.mesh(4).unwrap(), 2, 4).unwrap();
        let opts = SolverOptions::default();
        let b = solve(ProblemKind::Buckling, &disc, 1, &opts).unwrap();
        let c = solve(ProblemKind::Clamped, &disc, 1, &opts).unwrap();
        for row in boundary_formula_buckling(&disc, &b).unwrap().into_iter().chain(boundary_formula_clamped(&disc, &c).unwrap()) {
            assert!((row.ratio - 1.0).abs() < 1e-2, "{}: {row:?}", domain.name);
        }
    }
}

#[test]
fn boundary_formula_rejects_curved_metric() {
    let domain = Domain::hyperbolic_disk(0.5, -1.0).unwrap();
    let disc = Discretization::new(&domain, &domain.mesh(1).unwrap(), 2, 4).unwrap();
    let b = solve(ProblemKind::Buckling, &disc, 1, &SolverOptions::default()).unwrap();
    assert!(boundary_formula_buckling(&disc, &b).is_err());
}
