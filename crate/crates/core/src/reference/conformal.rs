//! Exterior conformal maps `Phi` from the complement of a compact set onto
//! the complement of the closed unit disk, normalized by `Phi(inf) = inf`
//! and `Phi'(inf) > 0`.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

type ComplexFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Evaluation handles for an exterior map together with optional inverse.
///
/// The inverse `psi = Phi^{-1}` is needed only for the level-curve geometry
/// (`dist(Gamma, partial G_r)`); maps without it still support every
/// pointwise predictor.
#[derive(Clone)]
pub struct ConformalMap {
    label: String,
    phi: ComplexFn,
    dphi: ComplexFn,
    inverse: Option<ComplexFn>,
}

impl fmt::Debug for ConformalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConformalMap").field("label", &self.label).finish_non_exhaustive()
    }
}

impl ConformalMap {
    /// Map supplied by the caller, e.g. from an external Schwarz-Christoffel solver.
    pub fn external<F, D>(label: &str, phi: F, dphi: D) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        D: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        ConformalMap { label: label.to_string(), phi: Arc::new(phi), dphi: Arc::new(dphi), inverse: None }
    }

    /// Attach the inverse map `w -> z`, defined for `|w| >= 1`.
    pub fn with_inverse<F>(mut self, inverse: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        self.inverse = Some(Arc::new(inverse));
        self
    }

    /// Closed disk of the given centre and radius: `Phi(z) = (z - c) / r`.
    pub fn disk(center: Complex64, radius: f64) -> Self {
        assert!(radius > 0.0, "disk radius must be positive");
        ConformalMap::external("disk", move |z| (z - center) / radius, move |_| {
            Complex64::new(1.0 / radius, 0.0)
        })
        .with_inverse(move |w| center + w * radius)
    }

    /// Filled ellipse with semi-axes `a >= b >= 0` along the real and imaginary axes.
    ///
    /// `Phi(z) = (z + sqrt(z^2 - c^2)) / (a + b)` with `c^2 = a^2 - b^2`; the
    /// square root is the one making `|z + sqrt(z^2 - c^2)|` the larger of the
    /// two choices. `b = 0` gives the segment `[-a, a]`.
    pub fn ellipse(a: f64, b: f64) -> Self {
        assert!(a > 0.0 && b >= 0.0 && b <= a, "ellipse needs a >= b >= 0, a > 0");
        let c2 = a * a - b * b;
        let s = a + b;
        let root = move |z: Complex64| {
            let r = (z * z - c2).sqrt();
            if (z + r).norm() >= (z - r).norm() {
                r
            } else {
                -r
            }
        };
        let ratio = (a - b) / s;
        ConformalMap::external(
            "ellipse",
            move |z| (z + root(z)) / s,
            move |z| {
                let r = root(z);
                if r.norm() == 0.0 {
                    Complex64::new(f64::INFINITY, 0.0)
                } else {
                    (z + r) / (s * r)
                }
            },
        )
        .with_inverse(move |w| 0.5 * s * (w + ratio / w))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn phi(&self, z: Complex64) -> Complex64 {
        (self.phi)(z)
    }

    pub fn dphi(&self, z: Complex64) -> Complex64 {
        (self.dphi)(z)
    }

    pub fn inverse(&self, w: Complex64) -> Option<Complex64> {
        self.inverse.as_ref().map(|f| f(w))
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    /// `samples` points of the level curve `|Phi| = r`, or `None` without an inverse.
    pub fn level_curve(&self, r: f64, samples: usize) -> Option<Vec<Complex64>> {
        let inv = self.inverse.as_ref()?;
        Some(
            (0..samples)
                .map(|k| inv(Complex64::from_polar(r, TAU * k as f64 / samples as f64)))
                .collect(),
        )
    }

    /// Sampled distance between the boundary `Gamma` and the level curve `|Phi| = r`.
    pub fn level_distance(&self, r: f64, samples: usize) -> Option<f64> {
        let inner = self.level_curve(1.0, samples)?;
        let outer = self.level_curve(r, samples)?;
        let mut best = f64::INFINITY;
        for p in &outer {
            for q in &inner {
                best = best.min((p - q).norm());
            }
        }
        Some(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ellipse_map_is_exterior_and_normalized() {
        let map = ConformalMap::ellipse(1.5, 0.5);
        for k in 0..64 {
            let t = TAU * k as f64 / 64.0;
            let z = Complex64::new(1.6 * t.cos(), 0.6 * t.sin());
            assert!(map.phi(z).norm() > 1.0);
        }
        let big = Complex64::new(3e7, 4e7);
        let lead = map.phi(big) / big;
        assert!((lead - Complex64::new(1.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn ellipse_inverse_round_trips() {
        let map = ConformalMap::ellipse(2.0, 1.0);
        for z in [Complex64::new(2.5, 0.3), Complex64::new(-0.2, 1.7), Complex64::new(0.0, -3.0)] {
            let w = map.phi(z);
            assert!((map.inverse(w).unwrap() - z).norm() < 1e-12);
        }
    }

    #[test]
    fn ellipse_derivative_matches_difference_quotient() {
        let map = ConformalMap::ellipse(1.0, 0.6);
        let z = Complex64::new(1.1, 0.8);
        let h = 1e-6;
        let fd = (map.phi(z + h) - map.phi(z - h)) / (2.0 * h);
        assert!((fd - map.dphi(z)).norm() < 1e-8);
    }

    #[test]
    fn disk_level_distance() {
        let map = ConformalMap::disk(Complex64::new(0.5, 0.0), 2.0);
        let d = map.level_distance(1.25, 64).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
    }
}
