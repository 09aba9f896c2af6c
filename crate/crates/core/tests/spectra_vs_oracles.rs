//! FEM spectra against reference values from the oracle crate. The reference
//! values are frozen here and re-derived from the oracle on every run.

use speclab_core::eigen::SolverOptions;
use speclab_core::geometry::Domain;
use speclab_core::problems::{solve, Discretization, ProblemKind, SpectralResult};
use speclab_oracle::{
    bessel_j_prime_zero, bessel_j_zero, buckling_disk, clamped_disk, eta_disk, rectangle_dirichlet,
    rectangle_neumann, RadialMode,
};

const J01_SQ: f64 = 5.783_185_962_946_784;
const J11_SQ: f64 = 14.681_970_642_123_89;
const JP11_SQ: f64 = 3.389_957_716_671_888;
const CLAMPED_DISK_1: f64 = 104.363_105_558_844_34;
const ETA_DISK: [f64; 3] = [2.0, 4.0, 6.0];
const TWO_PI_SQ: f64 = 19.739_208_802_178_716;
const PI_SQ: f64 = 9.869_604_401_089_358;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn spectrum(domain: &Domain, level: usize, kind: ProblemKind, k: usize) -> SpectralResult {
    let mesh = domain.mesh(level).unwrap();
    let disc = Discretization::new(domain, &mesh, 2, 4).unwrap();
    solve(kind, &disc, k, &SolverOptions::default()).unwrap()
}

#[test]
fn frozen_values_match_oracle() {
    let sq = |x: f64| x * x;
    assert!(rel(sq(bessel_j_zero(0, 1)), J01_SQ) < 1e-10);
    assert!(rel(sq(bessel_j_zero(1, 1)), J11_SQ) < 1e-10);
    assert!(rel(sq(bessel_j_prime_zero(1, 1)), JP11_SQ) < 1e-10);
    assert!(rel(buckling_disk(RadialMode { m: 0, root: 1 }), J11_SQ) < 1e-8);
    assert!(rel(clamped_disk(RadialMode { m: 0, root: 1 }), CLAMPED_DISK_1) < 1e-8);
    for (m, &eta) in ETA_DISK.iter().enumerate() {
        assert!(rel(eta_disk(m as u32), eta) < 1e-8, "mode {}", m + 1);
    }
    assert!(rel(rectangle_dirichlet(1.0, 1.0, 1)[0], TWO_PI_SQ) < 1e-14);
    assert!(rel(rectangle_neumann(1.0, 1.0, 2)[1], PI_SQ) < 1e-14);
}

#[test]
fn disk_second_order_spectra() {
    let disk = Domain::disk(1.0).unwrap();
    let d = spectrum(&disk, 4, ProblemKind::Dirichlet, 4);
    assert!(rel(d.value(1), J01_SQ) < 5e-3, "{}", d.value(1));
    assert!(rel(d.value(2), J11_SQ) < 5e-3);
    assert!(rel(d.value(3), J11_SQ) < 5e-3);
    assert_eq!(d.multiplicity(2), 2);

    let n = spectrum(&disk, 4, ProblemKind::Neumann, 3);
    assert!(n.value(1).abs() < 1e-8);
    assert!(rel(n.value(2), JP11_SQ) < 5e-3);
    assert!(rel(n.value(3), JP11_SQ) < 5e-3);

    let s = spectrum(&disk, 4, ProblemKind::Steklov, 5);
    assert!(s.value(1).abs() < 1e-8);
    for (i, expected) in [1.0, 1.0, 2.0, 2.0].into_iter().enumerate() {
        assert!(rel(s.value(i + 2), expected) < 5e-3, "sigma_{} = {}", i + 2, s.value(i + 2));
    }
}

#[test]
fn square_second_order_spectra() {
    let square = Domain::square(1.0).unwrap();
    let d = spectrum(&square, 4, ProblemKind::Dirichlet, 3);
    let reference = rectangle_dirichlet(1.0, 1.0, 3);
    for i in 0..3 {
        assert!(rel(d.value(i + 1), reference[i]) < 5e-3, "{} vs {}", d.value(i + 1), reference[i]);
    }
    let n = spectrum(&square, 4, ProblemKind::Neumann, 4);
    let reference = rectangle_neumann(1.0, 1.0, 4);
    assert!(n.value(1).abs() < 1e-8);
    for i in 1..4 {
        assert!(rel(n.value(i + 1), reference[i]) < 5e-3);
    }
}

#[test]
fn disk_biharmonic_spectra() {
    let disk = Domain::disk(1.0).unwrap();
    let eta = spectrum(&disk, 4, ProblemKind::Bsteklov1, 3);
    assert!(rel(eta.value(1), ETA_DISK[0]) < 2e-2, "{}", eta.value(1));
    assert!(rel(eta.value(2), ETA_DISK[1]) < 2e-2);

    let xi = spectrum(&disk, 4, ProblemKind::Bsteklov2, 4);
    assert!(xi.value(1).abs() < 1e-8);
    assert!(rel(xi.value(2), 4.0) < 2e-2, "{}", xi.value(2));
    assert!(rel(xi.value(4), 24.0) < 2e-2, "{}", xi.value(4));

    let buckling = spectrum(&disk, 4, ProblemKind::Buckling, 1);
    assert!(rel(buckling.value(1), J11_SQ) < 2e-2);
    let clamped = spectrum(&disk, 4, ProblemKind::Clamped, 1);
    assert!(rel(clamped.value(1), CLAMPED_DISK_1) < 2e-2, "{}", clamped.value(1));
}
