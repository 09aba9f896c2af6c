//! Reference eigenvalues that do not touch the finite element code.
//!
//! Bessel functions are evaluated from their integral representations with
//! the periodic trapezoid rule, roots are bracketed and bisected, and the
//! fourth-order disk problems are solved by shooting a radial ODE from a
//! Frobenius start near the origin. Rectangle spectra come from separation
//! of variables.

pub mod bessel;
pub mod comparison;
pub mod radial;
pub mod separable;

pub use bessel::{
    bessel_i, bessel_j, bessel_j_prime, bessel_j_prime_zero, bessel_j_zero, clamped_frequency_zero,
};
pub use comparison::{grid_constants, r_h_closed};
pub use radial::{buckling_disk, clamped_disk, eta_disk, RadialMode};
pub use separable::{rectangle_dirichlet, rectangle_neumann};

/// Finds a root of `f` in `[lo, hi]` by bisection. `f(lo)` and `f(hi)` must
/// have opposite signs.
pub fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Returns the first `count` sign changes of `f` on `(start, ..)`, scanning
/// with step `step` and refining each bracket by bisection.
pub fn scan_roots(start: f64, step: f64, count: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut roots = Vec::with_capacity(count);
    let mut a = start;
    let mut fa = f(a);
    let mut guard = 0usize;
    while roots.len() < count && guard < 1_000_000 {
        let b = a + step;
        let fb = f(b);
        if fa.signum() != fb.signum() && fa != 0.0 {
            if let Some(r) = bisect(a, b, &f) {
                roots.push(r);
            }
        }
        a = b;
        fa = fb;
        guard += 1;
    }
    roots
}
