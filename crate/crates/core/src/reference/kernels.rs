//! Explicit Christoffel-Darboux kernels: Bergman disk, tensor Chebyshev,
//! unit ball and polydisk, plus the exterior predictors for area measures.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::reference::conformal::ConformalMap;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// `sum_{k=0}^{n} c_k x^k` by Horner's rule.
fn horner(coeffs: impl DoubleEndedIterator<Item = f64>, x: Complex64) -> Complex64 {
    coeffs.rev().fold(zero(), |acc, c| acc * x + c)
}

/// Area-measure kernel of the unit disk, `(1/pi) sum_{j<=n} (j+1) (z conj w)^j`.
pub fn bergman_disk_kernel(n: usize, z: Complex64, w: Complex64) -> Complex64 {
    horner((0..=n).map(|j| (j + 1) as f64), z * w.conj()) / PI
}

/// `max_{|z| <= 1} K_n(z, z) = (n+1)(n+2) / (2 pi)`, attained on the circle.
pub fn bergman_disk_max(n: usize) -> f64 {
    ((n + 1) * (n + 2)) as f64 / (2.0 * PI)
}

/// Large-`n` form of the disk kernel off the disk, `(n+1)/pi |z|^{2n+2} / (|z|^2 - 1)`.
pub fn bergman_disk_exterior(n: usize, z: Complex64) -> f64 {
    let r2 = z.norm_sqr();
    (n + 1) as f64 / PI * r2.powi(n as i32 + 1) / (r2 - 1.0)
}

/// Exterior predictors for the area measure of the domain bounded by `map`'s curve.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BergmanPrediction {
    /// `(n+1)/pi |Phi'|^2 / (|Phi|^2 - 1) |Phi|^{2n+2}`, the large-`n` diagonal.
    pub exterior_kernel: f64,
    /// `1 / Phi(z)`, the limit of `p_n(z) / p_{n+1}(z)`.
    pub ratio: Complex64,
    pub phi_modulus: f64,
}

/// Pointwise exterior predictors; `z` must satisfy `|Phi(z)| > 1`.
pub fn bergman_predictors(map: &ConformalMap, n: usize, z: Complex64) -> Result<BergmanPrediction> {
    let phi = map.phi(z);
    let m2 = phi.norm_sqr();
    if !(m2 > 1.0) || !m2.is_finite() {
        return Err(Error::Domain(format!("|Phi(z)| = {} is not > 1: z is not exterior", m2.sqrt())));
    }
    let dphi = map.dphi(z).norm_sqr();
    Ok(BergmanPrediction {
        exterior_kernel: (n + 1) as f64 / PI * dphi / (m2 - 1.0) * m2.powi(n as i32 + 1),
        ratio: 1.0 / phi,
        phi_modulus: m2.sqrt(),
    })
}

/// Interior bound `1 / (pi dist(z, Gamma)^2)`, valid for every `n`.
pub fn interior_bound(dist: f64) -> f64 {
    1.0 / (PI * dist * dist)
}

/// Level `r(n) = sqrt(1 + 1/(n+1))` of the curve on which the support maximum is controlled.
pub fn level_radius(n: usize) -> f64 {
    (1.0 + 1.0 / (n + 1) as f64).sqrt()
}

/// `gamma_n = c1 / dist(Gamma, partial G_{r(n)})^2`; `c1` depends only on the
/// domain and is supplied by the caller, see [`calibrate_boundary_constant`].
pub fn boundary_gamma(map: &ConformalMap, n: usize, c1: f64, samples: usize) -> Result<f64> {
    let d = level_gap(map, n, samples)?;
    Ok(c1 / (d * d))
}

fn level_gap(map: &ConformalMap, n: usize, samples: usize) -> Result<f64> {
    map.level_distance(level_radius(n), samples)
        .ok_or_else(|| Error::InvalidInput(format!("conformal map `{}` has no inverse", map.label())))
}

/// Smallest `c1` making `gamma_n` dominate every observed `(n, max K_n on G_{r(n)})` pair.
pub fn calibrate_boundary_constant(
    map: &ConformalMap,
    observed: &[(usize, f64)],
    samples: usize,
) -> Result<f64> {
    let mut c1 = 0.0f64;
    for &(n, kmax) in observed {
        let d = level_gap(map, n, samples)?;
        c1 = c1.max(kmax * d * d);
    }
    Ok(c1)
}

/// `1 + 2 sum_{k=1}^{n} T_k(x) conj(T_k(y))`, the kernel of the normalized
/// arcsine measure on `[-1, 1]` (`p_0 = 1`, `p_k = sqrt(2) T_k`).
pub fn chebyshev_univariate_kernel(n: usize, x: Complex64, y: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let (mut tx0, mut tx1) = (one, x);
    let (mut ty0, mut ty1) = (one, y);
    let mut sum = one;
    for k in 1..=n {
        sum += 2.0 * tx1 * ty1.conj();
        if k < n {
            let tx2 = 2.0 * x * tx1 - tx0;
            let ty2 = 2.0 * y * ty1 - ty0;
            tx0 = tx1;
            tx1 = tx2;
            ty0 = ty1;
            ty1 = ty2;
        }
    }
    sum
}

/// Product of univariate Chebyshev kernels over the coordinates: the kernel
/// of the product arcsine measure for tensor-degree `n` polynomials.
pub fn chebyshev_tensor_kernel(n: usize, z: &[Complex64], w: &[Complex64]) -> Complex64 {
    assert_eq!(z.len(), w.len(), "chebyshev kernel dimension");
    z.iter().zip(w).map(|(x, y)| chebyshev_univariate_kernel(n, *x, *y)).product()
}

/// `K_N((1,..,1), (1,..,1))` computed in integer arithmetic.
///
/// Runs the Chebyshev recurrence at `x = 1` over the integers, so a wrong
/// closed form would show up as a mismatch rather than a rounding artefact.
/// Returns `None` on overflow.
pub fn chebyshev_corner_value(n: usize, dim: u32) -> Option<u128> {
    let (mut t0, mut t1): (i128, i128) = (1, 1);
    let mut sum: i128 = 1;
    for k in 1..=n {
        sum = sum.checked_add(2i128.checked_mul(t1.checked_mul(t1)?)?)?;
        if k < n {
            let t2 = 2i128.checked_mul(t1)?.checked_sub(t0)?;
            t0 = t1;
            t1 = t2;
        }
    }
    u128::try_from(sum).ok()?.checked_pow(dim)
}

/// Joukowski parameter `u` with `z = (u + 1/u)/2` and `|u| >= 1`.
pub fn joukowski_parameter(z: Complex64) -> Complex64 {
    let r = (z * z - 1.0).sqrt();
    if (z + r).norm() >= (z - r).norm() {
        z + r
    } else {
        z - r
    }
}

/// Large-`n` form of the univariate Chebyshev diagonal off `[-1, 1]`,
/// `|u|^{2n} / (2 (1 - |u|^{-2}))`.
pub fn chebyshev_univariate_exterior(n: usize, z: Complex64) -> f64 {
    let m2 = joukowski_parameter(z).norm_sqr();
    m2.powi(n as i32) / (2.0 * (1.0 - 1.0 / m2))
}

/// Running-product Pochhammer symbol `(a)_k = a (a+1) ... (a+k-1)`.
pub fn pochhammer(a: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (a + i as f64))
}

/// Hermitian pairing `w* z = sum z_j conj(w_j)`.
pub fn pairing(z: &[Complex64], w: &[Complex64]) -> Complex64 {
    z.iter().zip(w).map(|(a, b)| a * b.conj()).sum()
}

/// Kernel of the normalized-by-`pi^d` volume measure on the complex unit ball,
/// `(1/pi^d) sum_{k<=n} (k+1)_d (w* z)^k`.
pub fn complex_ball_kernel(d: usize, n: usize, z: &[Complex64], w: &[Complex64]) -> Complex64 {
    assert!(z.len() == d && w.len() == d, "complex ball kernel dimension");
    // (k+1)_d by a running product: (k+1)_d = (k)_d (k+d)/k.
    let mut coeffs = Vec::with_capacity(n + 1);
    let mut c = pochhammer(1.0, d);
    coeffs.push(c);
    for k in 1..=n {
        c *= (k + d) as f64 / k as f64;
        coeffs.push(c);
    }
    horner(coeffs.into_iter(), pairing(z, w)) / PI.powi(d as i32)
}

/// `(n+1)_{d+1} / (pi^d (d+1))`, the ball kernel when `w* z = 1`.
pub fn complex_ball_unit_pairing(d: usize, n: usize) -> f64 {
    pochhammer((n + 1) as f64, d + 1) / (PI.powi(d as i32) * (d + 1) as f64)
}

/// Bergman kernel of the ball, `d! / pi^d (1 - w* z)^{-d-1}`.
pub fn complex_ball_bergman(d: usize, pairing: Complex64) -> Complex64 {
    pochhammer(1.0, d) / PI.powi(d as i32) * (1.0 - pairing).powi(-(d as i32) - 1)
}

/// Kernel of area measure on the unit polydisk for total degree `n`,
/// `(1/pi^d) sum_{|a|<=n} prod_j (a_j+1) (z_j conj w_j)^{a_j}`.
pub fn polydisk_kernel(d: usize, n: usize, z: &[Complex64], w: &[Complex64]) -> Complex64 {
    assert!(z.len() == d && w.len() == d, "polydisk kernel dimension");
    // by_degree[t] = sum over multi-indices of the processed coordinates with |a| = t.
    let mut by_degree = vec![zero(); n + 1];
    by_degree[0] = Complex64::new(1.0, 0.0);
    for j in 0..d {
        let x = z[j] * w[j].conj();
        let mut factor = Vec::with_capacity(n + 1);
        let mut p = Complex64::new(1.0, 0.0);
        for a in 0..=n {
            factor.push(p * (a + 1) as f64);
            p *= x;
        }
        let mut next = vec![zero(); n + 1];
        for (t, slot) in next.iter_mut().enumerate() {
            for a in 0..=t {
                *slot += by_degree[t - a] * factor[a];
            }
        }
        by_degree = next;
    }
    by_degree.iter().sum::<Complex64>() / PI.powi(d as i32)
}

/// Bergman kernel of the polydisk, `(1/pi^d) prod 1/(1 - z_j conj w_j)^2`.
pub fn polydisk_bergman(z: &[Complex64], w: &[Complex64]) -> Complex64 {
    let p: Complex64 = z.iter().zip(w).map(|(a, b)| (1.0 - a * b.conj()).powi(-2)).product();
    p / PI.powi(z.len() as i32)
}

/// A closed-form kernel selected at run time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosedFormKernel {
    BergmanDisk { n: usize },
    ChebyshevTensor { dim: usize, n: usize },
    ComplexBall { dim: usize, n: usize },
    Polydisk { dim: usize, n: usize },
}

impl ClosedFormKernel {
    /// Parse `bergman-disk`, `chebyshev-tensor`, `complex-ball` or `polydisk`.
    pub fn from_name(name: &str, dim: usize, n: usize) -> Result<Self> {
        match name {
            "bergman-disk" if dim == 1 => Ok(ClosedFormKernel::BergmanDisk { n }),
            "bergman-disk" => Err(Error::DimensionMismatch { expected: 1, found: dim }),
            "chebyshev-tensor" => Ok(ClosedFormKernel::ChebyshevTensor { dim, n }),
            "complex-ball" => Ok(ClosedFormKernel::ComplexBall { dim, n }),
            "polydisk" => Ok(ClosedFormKernel::Polydisk { dim, n }),
            other => Err(Error::InvalidInput(format!("unknown kernel kind `{other}`"))),
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            ClosedFormKernel::BergmanDisk { .. } => 1,
            ClosedFormKernel::ChebyshevTensor { dim, .. }
            | ClosedFormKernel::ComplexBall { dim, .. }
            | ClosedFormKernel::Polydisk { dim, .. } => dim,
        }
    }

    pub fn eval(&self, z: &[Complex64], w: &[Complex64]) -> Result<Complex64> {
        let d = self.dim();
        for v in [z, w] {
            if v.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: v.len() });
            }
        }
        Ok(match *self {
            ClosedFormKernel::BergmanDisk { n } => bergman_disk_kernel(n, z[0], w[0]),
            ClosedFormKernel::ChebyshevTensor { n, .. } => chebyshev_tensor_kernel(n, z, w),
            ClosedFormKernel::ComplexBall { dim, n } => complex_ball_kernel(dim, n, z, w),
            ClosedFormKernel::Polydisk { dim, n } => polydisk_kernel(dim, n, z, w),
        })
    }
}
