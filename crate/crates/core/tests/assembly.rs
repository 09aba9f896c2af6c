use speclab_core::fem::{FeSpace, Forms};
use speclab_core::geometry::{Domain, MetricModel};
use speclab_core::mesh::mesh_polygon;

#[test]
fn matrices_are_symmetric_and_definite() {
    for domain in [Domain::disk(1.0).unwrap(), Domain::hyperbolic_disk(1.0, -1.0).unwrap()] {
        let space = FeSpace::new(&domain.mesh(2).unwrap(), 2).unwrap();
        let forms = Forms::assemble(&space, &domain.metric, 4).unwrap();
        for m in [&forms.stiffness, &forms.mass, &forms.boundary_mass] {
            assert!(m.asymmetry() <= 1e-14 * m.norm_inf(), "{}", domain.name);
        }
        let mass = forms.mass.to_dense();
        let eig = mass.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
        assert!(eig[0] > 0.0);
        let stiff = forms.stiffness.to_dense().self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
        assert!(stiff[0] >= -1e-10 * forms.stiffness.norm_inf());
    }
}

#[test]
fn stiffness_is_conformally_invariant() {
    let domain = Domain::disk(0.8).unwrap();
    let space = FeSpace::new(&domain.mesh(2).unwrap(), 2).unwrap();
    let flat = Forms::assemble(&space, &MetricModel::euclidean(), 4).unwrap();
    let hyperbolic = Forms::assemble(&space, &MetricModel::with_curvature(-1.0), 4).unwrap();
    let n = space.dof_count();
    for i in 0..n {
        for (j, v) in flat.stiffness.row(i) {
            assert_eq!(v, hyperbolic.stiffness.get(i, j));
        }
    }
    assert_ne!(flat.mass.get(0, 0), hyperbolic.mass.get(0, 0));
}

#[test]
fn generated_meshes_keep_angles_and_area() {
    for (domain, floor) in [
        (Domain::square(1.0).unwrap(), 45.0),
        (Domain::rectangle(2.0, 1.0).unwrap(), 26.0),
        (Domain::disk(1.0).unwrap(), 25.0),
        (Domain::lshape().unwrap(), 18.0),
    ] {
        let mut mesh = domain.mesh(0).unwrap();
        for level in 0..4 {
            if level > 0 {
                mesh = domain.refine(&mesh).unwrap();
            }
            assert!(mesh.min_angle_degrees() >= floor - 1e-9, "{} L{level}: {}", domain.name, mesh.min_angle_degrees());
            if !domain.boundary.is_curved() {
                let boundary = mesh.boundary_area();
                assert!((mesh.total_area() - boundary).abs() <= 1e-12 * boundary, "{}", domain.name);
            }
        }
    }
}

#[test]
fn polygon_mesher_covers_polygon() {
    let poly = [[0.0, 0.0], [3.0, 0.0], [3.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]];
    let mesh = mesh_polygon(&poly).unwrap();
    assert!((mesh.total_area() - 4.0).abs() < 1e-12);
}
