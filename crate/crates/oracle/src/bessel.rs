//! Integer-order Bessel functions from their integral representations.
//!
//! `J_n(x) = (1/pi) int_0^pi cos(n t - x sin t) dt` has a smooth periodic
//! integrand, so the trapezoid rule converges geometrically. The same holds
//! for `I_n(x) = (1/pi) int_0^pi exp(x cos t) cos(n t) dt`.

use std::f64::consts::PI;

const PANELS: usize = 256;

fn trapezoid_periodic(f: impl Fn(f64) -> f64) -> f64 {
    // The integrands are even and 2pi-periodic, so the half-period trapezoid
    // rule with endpoint weights 1/2 is spectrally accurate.
    let h = PI / PANELS as f64;
    let mut sum = 0.5 * (f(0.0) + f(PI));
    for i in 1..PANELS {
        sum += f(i as f64 * h);
    }
    sum * h / PI
}

pub fn bessel_j(n: u32, x: f64) -> f64 {
    let n = n as f64;
    trapezoid_periodic(|t| (n * t - x * t.sin()).cos())
}

pub fn bessel_j_prime(n: u32, x: f64) -> f64 {
    if n == 0 {
        -bessel_j(1, x)
    } else {
        0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))
    }
}

pub fn bessel_i(n: u32, x: f64) -> f64 {
    let n = n as f64;
    trapezoid_periodic(|t| (x * t.cos()).exp() * (n * t).cos())
}

pub fn bessel_i_prime(n: u32, x: f64) -> f64 {
    if n == 0 {
        bessel_i(1, x)
    } else {
        0.5 * (bessel_i(n - 1, x) + bessel_i(n + 1, x))
    }
}

/// `s`-th positive zero of `J_n` (1-based).
pub fn bessel_j_zero(n: u32, s: usize) -> f64 {
    let roots = crate::scan_roots(1e-3, 0.05, s, |x| bessel_j(n, x));
    roots[s - 1]
}

/// `s`-th positive zero of `J_n'` (1-based). For `n = 0` the trivial zero at
/// the origin is skipped.
pub fn bessel_j_prime_zero(n: u32, s: usize) -> f64 {
    let roots = crate::scan_roots(1e-3, 0.05, s, |x| bessel_j_prime(n, x));
    roots[s - 1]
}

/// Roots of the clamped-disk frequency determinant
/// `J_n(k) I_n'(k) - J_n'(k) I_n(k)` for mode `n`.
pub fn clamped_frequency_zero(n: u32, s: usize) -> f64 {
    let det = |k: f64| bessel_j(n, k) * bessel_i_prime(n, k) - bessel_j_prime(n, k) * bessel_i(n, k);
    let roots = crate::scan_roots(1e-2, 0.05, s, det);
    roots[s - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_values() {
        // Abramowitz & Stegun table 9.1
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((bessel_j(1, 2.0) - 0.576_724_807_756_873_4).abs() < 1e-14);
        assert!((bessel_i(0, 1.0) - 1.266_065_877_752_008_4).abs() < 1e-13);
    }

    #[test]
    fn first_zeros() {
        assert!((bessel_j_zero(0, 1) - 2.404_825_557_695_773).abs() < 1e-10);
        assert!((bessel_j_zero(1, 1) - 3.831_705_970_207_512).abs() < 1e-10);
        assert!((bessel_j_prime_zero(1, 1) - 1.841_183_781_340_659).abs() < 1e-10);
        assert!((bessel_j_prime_zero(2, 1) - 3.054_236_928_227_140).abs() < 1e-10);
    }

    #[test]
    fn clamped_determinant_root() {
        let k = clamped_frequency_zero(0, 1);
        assert!((k - 3.196_220_616_582_96).abs() < 1e-8, "{k}");
    }
}
