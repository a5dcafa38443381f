//! Cubature rules turning continuous reference measures into discrete ones.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::Result;
use crate::measures::{DiscreteMeasure, QuadratureMeasure};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Chebyshev (first kind) nodes with weights `1/m`, exact for the
/// normalized arcsine measure `dx / (pi sqrt(1 - x^2))` up to degree `2m - 1`.
pub fn gauss_chebyshev(m: usize) -> (Vec<f64>, Vec<f64>) {
    let nodes = (0..m)
        .map(|k| (PI * (2 * k + 1) as f64 / (2 * m) as f64).cos())
        .collect();
    (nodes, vec![1.0 / m as f64; m])
}

/// Polar product rule for area measure on the unit disk, exact for
/// `z^a conj(z)^b` whenever `a, b <= n`.
pub fn disk_area(n: usize) -> Result<QuadratureMeasure> {
    let (pts, w) = disk_rule(n);
    let measure = DiscreteMeasure::from_points_1d(&pts, w)?;
    QuadratureMeasure::new(measure, "area-unit-disk", PI, 1e-12)
}

fn disk_rule(n: usize) -> (Vec<Complex64>, Vec<f64>) {
    let radial = n + 2;
    let angular = 2 * n + 2;
    let (x, wx) = gauss_legendre(radial);
    let mut pts = Vec::with_capacity(radial * angular);
    let mut weights = Vec::with_capacity(radial * angular);
    for (xi, wi) in x.iter().zip(&wx) {
        let r = 0.5 * (xi + 1.0);
        let wr = 0.5 * wi * r;
        for k in 0..angular {
            pts.push(Complex64::from_polar(r, TAU * k as f64 / angular as f64));
            weights.push(wr * TAU / angular as f64);
        }
    }
    (pts, weights)
}

/// Area measure on the ellipse `(x/a)^2 + (y/b)^2 <= 1`, image of [`disk_area`]
/// under the real-linear map `x + iy -> a x + i b y`; exact for `|p|^2`, `deg p <= n`.
pub fn ellipse_area(a: f64, b: f64, n: usize) -> Result<QuadratureMeasure> {
    let (pts, w) = disk_rule(n);
    let pts: Vec<Complex64> = pts.iter().map(|z| Complex64::new(a * z.re, b * z.im)).collect();
    let w: Vec<f64> = w.iter().map(|x| x * a * b).collect();
    let measure = DiscreteMeasure::from_points_1d(&pts, w)?;
    QuadratureMeasure::new(measure, "area-ellipse", PI * a * b, 1e-12)
}

/// Tensor Gauss-Chebyshev rule for the product arcsine measure on `[-1, 1]^d`
/// (total mass 1), exact for polynomials of partial degree `<= 2m - 1`.
pub fn chebyshev_tensor(dim: usize, m: usize) -> Result<QuadratureMeasure> {
    let (x, w) = gauss_chebyshev(m);
    let total = m.pow(dim as u32);
    let mut atoms = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; dim];
    loop {
        atoms.push(idx.iter().map(|&i| Complex64::new(x[i], 0.0)).collect::<Vec<_>>());
        weights.push(idx.iter().map(|&i| w[i]).product());
        let mut v = 0;
        while v < dim {
            idx[v] += 1;
            if idx[v] < m {
                break;
            }
            idx[v] = 0;
            v += 1;
        }
        if v == dim {
            break;
        }
    }
    let measure = DiscreteMeasure::new(atoms, weights)?;
    QuadratureMeasure::new(measure, "chebyshev-tensor", 1.0, 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        for deg in 0..14 {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((got - want).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn chebyshev_rule_orthonormalizes_scaled_t() {
        let (x, w) = gauss_chebyshev(6);
        // int T_j T_k = delta_jk / 2 (j, k > 0).
        let t = |k: usize, x: f64| (k as f64 * x.acos()).cos();
        for j in 0..6 {
            for k in 0..6 {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * t(j, *x) * t(k, *x)).sum();
                let want = match (j, k) {
                    (0, 0) => 1.0,
                    _ if j == k => 0.5,
                    _ => 0.0,
                };
                assert!((got - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn disk_moments() {
        let n = 9;
        let q = disk_area(n).unwrap();
        for a in 0..=n {
            for b in 0..=n {
                let got: Complex64 = q
                    .measure
                    .atoms()
                    .iter()
                    .zip(q.measure.weights())
                    .map(|(z, w)| z[0].powu(a as u32) * z[0].conj().powu(b as u32) * w)
                    .sum();
                let want = if a == b { PI / (a as f64 + 1.0) } else { 0.0 };
                assert!((got - Complex64::new(want, 0.0)).norm() < 1e-13, "{a},{b}");
            }
        }
    }
}
