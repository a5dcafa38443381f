//! Seeded point-cloud generators used by experiments, tests and the CLI.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::measures::DiscreteMeasure;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform measure on the `n`-th roots of unity.
pub fn roots_of_unity(n: usize) -> DiscreteMeasure {
    let pts: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / n as f64))
        .collect();
    DiscreteMeasure::from_points_1d(&pts, vec![1.0 / n as f64; n]).expect("roots are distinct")
}

/// Uniform sample of the closed disk `|z| <= radius`.
pub fn disk_points<R: Rng>(count: usize, radius: f64, rng: &mut R) -> Vec<Complex64> {
    (0..count)
        .map(|_| {
            let r = radius * rng.gen::<f64>().sqrt();
            Complex64::from_polar(r, TAU * rng.gen::<f64>())
        })
        .collect()
}

/// Points in the annulus `r_min <= |z| <= r_max` with uniform radius and angle.
pub fn annulus_points<R: Rng>(count: usize, r_min: f64, r_max: f64, rng: &mut R) -> Vec<Complex64> {
    (0..count)
        .map(|_| Complex64::from_polar(rng.gen_range(r_min..=r_max), TAU * rng.gen::<f64>()))
        .collect()
}

/// A cloud with equal weights together with the indices of its planted outliers.
#[derive(Clone, Debug)]
pub struct PlantedCloud {
    pub measure: DiscreteMeasure,
    pub outliers: Vec<usize>,
}

/// `bulk` uniform samples of the unit disk followed by `outliers` points with
/// modulus in `[1.2, 1.8]`; equal weights `1/N`.
pub fn disk_with_outliers(bulk: usize, outliers: usize, seed: u64) -> PlantedCloud {
    let mut r = rng(seed);
    let mut pts = disk_points(bulk, 1.0, &mut r);
    pts.extend(annulus_points(outliers, 1.2, 1.8, &mut r));
    let n = pts.len();
    PlantedCloud {
        measure: DiscreteMeasure::from_points_1d(&pts, vec![1.0 / n as f64; n])
            .expect("continuous samples are distinct"),
        outliers: (bulk..n).collect(),
    }
}

/// Regular `side x side` grid of cell centres of the square `[-1, 1]^2`
/// (as points of `C`) followed by `outliers` points outside the square.
pub fn square_grid_with_outliers(side: usize, outliers: usize, seed: u64) -> PlantedCloud {
    let mut r = rng(seed);
    let h = 2.0 / side as f64;
    let mut pts = Vec::with_capacity(side * side + outliers);
    for i in 0..side {
        for j in 0..side {
            pts.push(Complex64::new(-1.0 + h * (i as f64 + 0.5), -1.0 + h * (j as f64 + 0.5)));
        }
    }
    while pts.len() < side * side + outliers {
        let z = Complex64::new(r.gen_range(-1.8..1.8), r.gen_range(-1.8..1.8));
        if z.re.abs().max(z.im.abs()) > 1.2 {
            pts.push(z);
        }
    }
    let n = pts.len();
    PlantedCloud {
        measure: DiscreteMeasure::from_points_1d(&pts, vec![1.0 / n as f64; n])
            .expect("grid and outliers are distinct"),
        outliers: (side * side..n).collect(),
    }
}

/// Points `(u^3, u^2)` in `C^2` for `u` on a polar grid of the unit disk:
/// the origin plus `radial` circles of `angular` equally spaced points.
pub fn cusp_curve(radial: usize, angular: usize) -> DiscreteMeasure {
    let mut atoms = vec![vec![Complex64::new(0.0, 0.0); 2]];
    for i in 1..=radial {
        let rad = i as f64 / radial as f64;
        for k in 0..angular {
            // Offset alternate rings so that no two circles share angles.
            let theta = TAU * (k as f64 + 0.5 * (i % 2) as f64) / angular as f64;
            let u = Complex64::from_polar(rad, theta);
            atoms.push(vec![u * u * u, u * u]);
        }
    }
    DiscreteMeasure::uniform(atoms).expect("u -> (u^3, u^2) is injective")
}

/// `count` atoms with independent coordinates uniform in the square
/// `[-1, 1] + i[-1, 1]`, and weights uniform in `[0.5, 1.5]`, normalized to mass 1.
pub fn random_cloud<R: Rng>(dim: usize, count: usize, rng: &mut R) -> DiscreteMeasure {
    let atoms: Vec<Vec<Complex64>> = (0..count)
        .map(|_| {
            (0..dim)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    let raw: Vec<f64> = (0..count).map(|_| rng.gen_range(0.5..1.5)).collect();
    let total: f64 = raw.iter().sum();
    DiscreteMeasure::new(atoms, raw.iter().map(|w| w / total).collect())
        .expect("continuous samples are distinct")
}

/// Uniform point of the unit disk scaled by `radius`.
pub fn disk_point<R: Rng>(radius: f64, rng: &mut R) -> Complex64 {
    Complex64::from_polar(radius * rng.gen::<f64>().sqrt(), TAU * rng.gen::<f64>())
}

/// Uniform angle in `[0, 2 pi)`.
pub fn angle<R: Rng>(rng: &mut R) -> f64 {
    rng.gen::<f64>() * 2.0 * PI
}
