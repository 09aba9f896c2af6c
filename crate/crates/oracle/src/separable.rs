//! Rectangle spectra by separation of variables.

use std::f64::consts::PI;

fn sorted_products(width: f64, height: f64, count: usize, first: u32) -> Vec<f64> {
    let reach = (count as u32 + 2) * 2;
    let mut values = Vec::new();
    for i in first..reach {
        for j in first..reach {
            let x = i as f64 / width;
            let y = j as f64 / height;
            values.push(PI * PI * (x * x + y * y));
        }
    }
    values.sort_by(f64::total_cmp);
    values.truncate(count);
    values
}

/// First `count` Dirichlet eigenvalues of `[0,w] x [0,h]`, with multiplicity.
pub fn rectangle_dirichlet(width: f64, height: f64, count: usize) -> Vec<f64> {
    sorted_products(width, height, count, 1)
}

/// First `count` Neumann eigenvalues of `[0,w] x [0,h]`, with multiplicity.
pub fn rectangle_neumann(width: f64, height: f64, count: usize) -> Vec<f64> {
    sorted_products(width, height, count, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square() {
        let d = rectangle_dirichlet(1.0, 1.0, 3);
        assert!((d[0] - 2.0 * PI * PI).abs() < 1e-12);
        assert!((d[1] - 5.0 * PI * PI).abs() < 1e-12);
        assert_eq!(d[1], d[2]);
        let n = rectangle_neumann(1.0, 1.0, 4);
        assert_eq!(n[0], 0.0);
        assert!((n[1] - PI * PI).abs() < 1e-12);
        assert!((n[3] - 2.0 * PI * PI).abs() < 1e-12);
    }
}
