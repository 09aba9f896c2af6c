//! Radial shooting for the fourth-order eigenproblems on the unit disk.
//!
//! For angular mode `m` the separated ansatz `u(r) cos(m t)` turns each
//! problem into the pair `L u = v`, `L v = a u + b v` with the radial
//! operator `L = d^2/dr^2 + (1/r) d/dr - m^2/r^2`. Regular solutions form a
//! two-dimensional family. Both basis solutions are started from their
//! Frobenius series at `r = START`, integrated to `r = 1` with classical RK4,
//! and the boundary conditions are imposed on the resulting 2x2 system.

const START: f64 = 0.2;
const STEPS: usize = 4000;
const SERIES_TERMS: usize = 40;

/// Angular mode number and root index of a separated disk eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RadialMode {
    pub m: u32,
    pub root: usize,
}

#[derive(Debug, Clone, Copy)]
struct Endpoint {
    u: f64,
    du: f64,
    v: f64,
}

fn series_start(m: u32, a: f64, b: f64, alpha0: f64, beta0: f64, r: f64) -> [f64; 4] {
    let mf = m as f64;
    let (mut alpha, mut beta) = (alpha0, beta0);
    let mut state = [0.0; 4];
    for k in 0..SERIES_TERMS {
        if k > 0 {
            let kf = k as f64;
            let denom = 4.0 * kf * (mf + kf);
            let next_alpha = beta / denom;
            let next_beta = (a * alpha + b * beta) / denom;
            alpha = next_alpha;
            beta = next_beta;
        }
        let p = mf + 2.0 * k as f64;
        let rp = r.powf(p);
        let drp = if p == 0.0 { 0.0 } else { p * r.powf(p - 1.0) };
        state[0] += alpha * rp;
        state[1] += alpha * drp;
        state[2] += beta * rp;
        state[3] += beta * drp;
    }
    state
}

fn rhs(m: u32, a: f64, b: f64, r: f64, y: &[f64; 4]) -> [f64; 4] {
    let m2 = (m * m) as f64;
    let [u, du, v, dv] = *y;
    [
        du,
        v - du / r + m2 * u / (r * r),
        dv,
        a * u + b * v - dv / r + m2 * v / (r * r),
    ]
}

fn shoot(m: u32, a: f64, b: f64, alpha0: f64, beta0: f64) -> Endpoint {
    let mut y = series_start(m, a, b, alpha0, beta0, START);
    let h = (1.0 - START) / STEPS as f64;
    let mut r = START;
    for _ in 0..STEPS {
        let k1 = rhs(m, a, b, r, &y);
        let y2 = add(&y, &k1, 0.5 * h);
        let k2 = rhs(m, a, b, r + 0.5 * h, &y2);
        let y3 = add(&y, &k2, 0.5 * h);
        let k3 = rhs(m, a, b, r + 0.5 * h, &y3);
        let y4 = add(&y, &k3, h);
        let k4 = rhs(m, a, b, r + h, &y4);
        for i in 0..4 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        r += h;
    }
    Endpoint { u: y[0], du: y[1], v: y[2] }
}

fn add(y: &[f64; 4], k: &[f64; 4], s: f64) -> [f64; 4] {
    [y[0] + s * k[0], y[1] + s * k[1], y[2] + s * k[2], y[3] + s * k[3]]
}

fn clamped_determinant(m: u32, a: f64, b: f64) -> f64 {
    let p = shoot(m, a, b, 1.0, 0.0);
    let q = shoot(m, a, b, 0.0, 1.0);
    p.u * q.du - q.u * p.du
}

/// Clamped plate eigenvalue `Gamma^2` on the unit disk for mode `m`, root `s`.
/// The scan runs over `Gamma` itself so that roots stay well separated.
pub fn clamped_disk(mode: RadialMode) -> f64 {
    let roots = crate::scan_roots(0.5, 0.25, mode.root, |gamma| {
        clamped_determinant(mode.m, gamma * gamma, 0.0)
    });
    let gamma = roots[mode.root - 1];
    gamma * gamma
}

/// Buckling eigenvalue `Lambda` on the unit disk for mode `m`, root `s`.
pub fn buckling_disk(mode: RadialMode) -> f64 {
    let roots = crate::scan_roots(0.5, 0.25, mode.root, |k| clamped_determinant(mode.m, 0.0, -k * k));
    let k = roots[mode.root - 1];
    k * k
}

/// First biharmonic Steklov (type I) eigenvalue of mode `m` on the unit disk.
/// The spectral parameter enters only through the boundary condition
/// `v(1) = eta u'(1)`, so it is solved for directly.
pub fn eta_disk(m: u32) -> f64 {
    let p = shoot(m, 0.0, 0.0, 1.0, 0.0);
    let q = shoot(m, 0.0, 0.0, 0.0, 1.0);
    (p.u * q.v - q.u * p.v) / (p.u * q.du - q.u * p.du)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::{bessel_j_zero, clamped_frequency_zero};

    #[test]
    fn buckling_matches_first_zero_of_j1() {
        let lam = buckling_disk(RadialMode { m: 0, root: 1 });
        let j11 = bessel_j_zero(1, 1);
        assert!((lam - j11 * j11).abs() < 1e-8 * lam, "{lam}");
    }

    #[test]
    fn clamped_matches_bessel_determinant() {
        let g2 = clamped_disk(RadialMode { m: 0, root: 1 });
        let k = clamped_frequency_zero(0, 1);
        assert!((g2 - k.powi(4)).abs() < 1e-7 * g2, "{g2} vs {}", k.powi(4));
    }

    #[test]
    fn eta_modes_follow_closed_form() {
        // u = r^(m+2) - r^m gives eta = 2(m+1)
        for m in 0..4 {
            let eta = eta_disk(m);
            assert!((eta - 2.0 * (m as f64 + 1.0)).abs() < 1e-9, "m={m} eta={eta}");
        }
    }
}
