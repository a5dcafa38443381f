//! Christoffel-Darboux kernels and the quantities derived from them.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::measures::DiscreteMeasure;
use crate::orthopoly::OrthoBasis;

/// Evaluates `K_n(z, w) = sum_j p_j(z) conj(p_j(w))` for a fixed basis.
#[derive(Clone, Debug)]
pub struct KernelEngine {
    basis: OrthoBasis,
}

/// Normalized kernel `K(z, w) / sqrt(K(z, z) K(w, w))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CosineValue(pub Complex64);

impl CosineValue {
    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn modulus(&self) -> f64 {
        self.0.norm()
    }
}

/// `l x l` matrix of kernel values `K(z_j, w_k)`.
#[derive(Clone, Debug)]
pub struct MultiPointKernel {
    pub matrix: CMatrix,
    pub z_list: Vec<Vec<Complex64>>,
    pub w_list: Vec<Vec<Complex64>>,
    /// 2-norm condition number (infinite when numerically singular).
    pub condition: f64,
}

impl MultiPointKernel {
    /// Invertibility judged by `condition < 1 / (64 eps)`.
    pub fn is_invertible(&self) -> bool {
        self.condition.is_finite() && self.condition < 1.0 / (64.0 * f64::EPSILON)
    }
}

/// How leverage scores are turned into outlier flags.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThresholdPolicy {
    /// `min(cap, max(floor, factor * quantile_q(scores)))`.
    Auto { quantile: f64, factor: f64, floor: f64, cap: f64 },
    Fixed(f64),
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        ThresholdPolicy::Auto { quantile: 0.99, factor: 2.0, floor: 0.5, cap: 0.9 }
    }
}

impl ThresholdPolicy {
    pub fn resolve(&self, scores: &[f64]) -> f64 {
        match *self {
            ThresholdPolicy::Fixed(t) => t,
            ThresholdPolicy::Auto { quantile: q, factor, floor, cap } => {
                (factor * quantile(scores, q)).max(floor).min(cap)
            }
        }
    }
}

/// Linear-interpolation quantile of unsorted data.
pub fn quantile(data: &[f64], q: f64) -> f64 {
    if data.is_empty() {
        return f64::NAN;
    }
    let mut s = data.to_vec();
    s.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    s[lo] + (s[hi] - s[lo]) * (pos - lo as f64)
}

/// Per-atom leverage scores `t_j K_n(z_j, z_j)` and flags.
#[derive(Clone, Debug, Serialize)]
pub struct LeverageReport {
    pub scores: Vec<f64>,
    pub score_sum: f64,
    pub threshold: f64,
    pub flagged: Vec<usize>,
}

impl LeverageReport {
    /// Atom indices sorted by decreasing score (ties by index).
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.scores.len()).collect();
        idx.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]).then(a.cmp(&b)));
        idx
    }
}

impl KernelEngine {
    pub fn new(basis: OrthoBasis) -> Self {
        KernelEngine { basis }
    }

    pub fn basis(&self) -> &OrthoBasis {
        &self.basis
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn check(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: z.len() });
        }
        Ok(())
    }

    /// `v_n(z)`.
    pub fn values(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.basis.evaluate(z)
    }

    /// `K_n(z, w)`.
    pub fn kernel(&self, z: &[Complex64], w: &[Complex64]) -> Complex64 {
        let vz = self.values(z);
        let vw = self.values(w);
        linalg::dot_conj(&vz, &vw)
    }

    /// `K_n(z, z)` as the squared norm of `v_n(z)`.
    pub fn diagonal(&self, z: &[Complex64]) -> f64 {
        self.values(z).iter().map(|x| x.norm_sqr()).sum()
    }

    /// `lambda_n(z) = 1 / K_n(z, z)`.
    pub fn christoffel(&self, z: &[Complex64]) -> Result<f64> {
        self.check(z)?;
        let k = self.diagonal(z);
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::VanishingKernel);
        }
        Ok(1.0 / k)
    }

    /// `C_n(z, w)`.
    pub fn cosine(&self, z: &[Complex64], w: &[Complex64]) -> Result<CosineValue> {
        self.check(z)?;
        self.check(w)?;
        let vz = self.values(z);
        let vw = self.values(w);
        Ok(CosineValue(cosine_of(&vz, &vw)?))
    }

    /// Matrix `K_n(z_j, w_k)` with its condition number.
    pub fn multipoint(&self, z_list: &[Vec<Complex64>], w_list: &[Vec<Complex64>]) -> Result<MultiPointKernel> {
        if z_list.is_empty() || z_list.len() != w_list.len() {
            return Err(Error::InvalidInput("point lists must be non-empty and of equal length".into()));
        }
        for p in z_list.iter().chain(w_list) {
            self.check(p)?;
        }
        let vz: Vec<Vec<Complex64>> = z_list.iter().map(|z| self.values(z)).collect();
        let vw: Vec<Vec<Complex64>> = w_list.iter().map(|w| self.values(w)).collect();
        let l = z_list.len();
        let matrix = CMatrix::from_fn(l, l, |j, k| linalg::dot_conj(&vz[j], &vw[k]));
        let sv = matrix.clone().singular_values();
        let max = sv.iter().fold(0.0f64, |a, v| a.max(*v));
        let min = sv.iter().fold(f64::INFINITY, |a, v| a.min(*v));
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        Ok(MultiPointKernel { matrix, z_list: z_list.to_vec(), w_list: w_list.to_vec(), condition })
    }

    /// Matrix of cosines `C_n(z_j, w_k)`.
    pub fn multipoint_cosine(&self, z_list: &[Vec<Complex64>], w_list: &[Vec<Complex64>]) -> Result<CMatrix> {
        let vz: Vec<Vec<Complex64>> = z_list.iter().map(|z| self.values(z)).collect();
        let vw: Vec<Vec<Complex64>> = w_list.iter().map(|w| self.values(w)).collect();
        let mut m = CMatrix::zeros(z_list.len(), w_list.len());
        for j in 0..z_list.len() {
            for k in 0..w_list.len() {
                m[(j, k)] = cosine_of(&vz[j], &vw[k])?;
            }
        }
        Ok(m)
    }

    /// Leverage scores of the measure the basis was built on.
    pub fn leverage_scores(&self, policy: ThresholdPolicy) -> LeverageReport {
        let v = self.basis.sample_values();
        let t = self.basis.measure().weights();
        let scores: Vec<f64> = (0..v.nrows())
            .map(|i| t[i] * v.row(i).iter().map(|x| x.norm_sqr()).sum::<f64>())
            .collect();
        let score_sum = scores.iter().sum();
        let threshold = policy.resolve(&scores);
        let flagged = (0..scores.len()).filter(|&i| scores[i] > threshold).collect();
        LeverageReport { scores, score_sum, threshold, flagged }
    }

    /// `K_n(z, z)` on a grid slice and the mask `K_n <= threshold`.
    pub fn level_field(&self, slice: &GridSlice, threshold: f64) -> Result<LevelField> {
        slice.validate(self.dim())?;
        let points = slice.points();
        let values: Vec<f64> = points.par_iter().map(|z| self.diagonal(z)).collect();
        let mask = values.iter().map(|&v| v <= threshold).collect();
        Ok(LevelField { grid: slice.grid, values, mask, threshold })
    }
}

fn cosine_of(vz: &[Complex64], vw: &[Complex64]) -> Result<Complex64> {
    let kz: f64 = vz.iter().map(|x| x.norm_sqr()).sum();
    let kw: f64 = vw.iter().map(|x| x.norm_sqr()).sum();
    if !(kz > 0.0 && kw > 0.0) || !kz.is_finite() || !kw.is_finite() {
        return Err(Error::VanishingKernel);
    }
    Ok(linalg::dot_conj(vz, vw) / (kz * kw).sqrt())
}

/// Rectangular lattice `x0..x1` by `y0..y1` with `nx x ny` nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    /// Parses `x0,x1,y0,y1,nx,ny`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err(Error::InvalidInput(format!("grid '{text}' must be x0,x1,y0,y1,nx,ny")));
        }
        let f = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("grid bound '{s}' is not a number")))
        };
        let u = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("grid size '{s}' is not a count")))
        };
        let g = GridSpec { x0: f(parts[0])?, x1: f(parts[1])?, y0: f(parts[2])?, y1: f(parts[3])?, nx: u(parts[4])?, ny: u(parts[5])? };
        if g.nx == 0 || g.ny == 0 {
            return Err(Error::InvalidInput("grid needs at least one node per axis".into()));
        }
        Ok(g)
    }

    pub fn x(&self, i: usize) -> f64 {
        if self.nx == 1 {
            self.x0
        } else {
            self.x0 + (self.x1 - self.x0) * i as f64 / (self.nx - 1) as f64
        }
    }

    pub fn y(&self, j: usize) -> f64 {
        if self.ny == 1 {
            self.y0
        } else {
            self.y0 + (self.y1 - self.y0) * j as f64 / (self.ny - 1) as f64
        }
    }

    /// Nodes row by row (`y` outer, `x` inner).
    pub fn nodes(&self) -> Vec<Complex64> {
        (0..self.ny)
            .flat_map(|j| (0..self.nx).map(move |i| (i, j)))
            .map(|(i, j)| Complex64::new(self.x(i), self.y(j)))
            .collect()
    }
}

/// Two-real-dimensional slice of `C^d`: coordinate `free` runs over the grid,
/// the others are fixed at `base`.
#[derive(Clone, Debug)]
pub struct GridSlice {
    pub grid: GridSpec,
    pub base: Vec<Complex64>,
    pub free: usize,
}

impl GridSlice {
    /// Slice of `C` (`d = 1`).
    pub fn plane(grid: GridSpec) -> Self {
        GridSlice { grid, base: vec![Complex64::new(0.0, 0.0)], free: 0 }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.base.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: self.base.len() });
        }
        if self.free >= dim {
            return Err(Error::InvalidInput(format!("free coordinate {} out of range", self.free)));
        }
        if self.grid.nx == 0 || self.grid.ny == 0 {
            return Err(Error::InvalidInput("grid is empty".into()));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<Vec<Complex64>> {
        self.grid
            .nodes()
            .into_iter()
            .map(|c| {
                let mut z = self.base.clone();
                z[self.free] = c;
                z
            })
            .collect()
    }
}

/// Diagonal kernel on a grid with the sub-level mask.
#[derive(Clone, Debug, Serialize)]
pub struct LevelField {
    pub grid: GridSpec,
    /// Row-major, `y` outer.
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
    pub threshold: f64,
}

impl LevelField {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }

    /// Grid nodes inside the mask.
    pub fn inside_nodes(&self) -> Vec<Complex64> {
        self.grid
            .nodes()
            .into_iter()
            .zip(&self.mask)
            .filter(|(_, &m)| m)
            .map(|(z, _)| z)
            .collect()
    }
}

/// Hausdorff distance between two finite planar sets (infinite if exactly one is empty).
pub fn hausdorff_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let directed = |p: &[Complex64], q: &[Complex64]| {
        p.par_iter()
            .map(|x| q.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .reduce(|| 0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Mahalanobis distance `sqrt((z - m) C^{-1} (z - m)^*)` for the normalized measure.
pub fn mahalanobis(measure: &DiscreteMeasure, z: &[Complex64]) -> Result<f64> {
    let d = measure.dim();
    if z.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: z.len() });
    }
    let total = measure.total_mass();
    let m = measure.mean();
    let mut cov = CMatrix::zeros(d, d);
    for (a, &t) in measure.atoms().iter().zip(measure.weights()) {
        let x: Vec<Complex64> = a.iter().zip(&m).map(|(a, m)| a - m).collect();
        for j in 0..d {
            for k in 0..d {
                cov[(j, k)] += x[j].conj() * x[k] * (t / total);
            }
        }
    }
    let (values, vectors) = linalg::hermitian_eigen(&cov);
    let max = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let deficient: Vec<String> = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= 1e-12 * max.max(f64::MIN_POSITIVE))
        .map(|(i, _)| {
            let dir: Vec<String> = vectors.column(i).iter().map(|c| format!("{c:.3}")).collect();
            format!("[{}]", dir.join(", "))
        })
        .collect();
    if !deficient.is_empty() {
        return Err(Error::Singular(format!(
            "covariance is singular along direction(s) {}",
            deficient.join("; ")
        )));
    }
    let x: Vec<Complex64> = z.iter().zip(&m).map(|(a, m)| a - m).collect();
    // Delta^2 = x C^{-1} x^*: solve C^T y = x^T, i.e. y^T = x C^{-1}.
    let rhs = linalg::column(&x);
    let y = linalg::cholesky_solve(&cov.transpose(), &rhs)?;
    let delta2: Complex64 = y.iter().zip(&x).map(|(y, x)| y * x.conj()).sum();
    Ok(delta2.re.max(0.0).sqrt())
}
