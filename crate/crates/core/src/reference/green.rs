//! Pluricomplex Green functions with pole at infinity for compact sets that
//! admit closed forms.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::measures::MultiIndex;
use crate::reference::conformal::ConformalMap;

/// `log|z + sqrt(z^2 - 1)|` with the square root chosen so that the modulus is at least 1.
///
/// This is the Green function of `[-1, 1]`; it vanishes exactly on the segment.
pub fn interval_green(z: Complex64) -> f64 {
    let r = (z * z - 1.0).sqrt();
    let m = (z + r).norm().max((z - r).norm());
    m.ln().max(0.0)
}

/// Interval Green function at the real point `1 + excess`, accurate when the
/// excess is tiny (where `g ~ sqrt(2 excess)` amplifies rounding in `1 + excess`).
fn interval_green_above_one(excess: f64) -> f64 {
    let e = excess.max(0.0);
    (e + (e * (2.0 + e)).sqrt()).ln_1p()
}

/// Norm used to measure `z - a` for a complex ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BallNorm {
    /// `sqrt(sum |z_j|^2)`
    Euclidean,
    /// `max |z_j|`, giving a polydisk.
    Max,
    /// `sum |z_j|`
    Sum,
}

impl BallNorm {
    pub fn apply(&self, z: &[Complex64]) -> f64 {
        match self {
            BallNorm::Euclidean => z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
            BallNorm::Max => z.iter().map(|c| c.norm()).fold(0.0, f64::max),
            BallNorm::Sum => z.iter().map(|c| c.norm()).sum(),
        }
    }
}

/// Polynomial in `d` complex variables, stored as a list of terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<(MultiIndex, Complex64)>,
}

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<(MultiIndex, Complex64)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidInput("polynomial has no terms".into()));
        }
        if let Some((a, _)) = terms.iter().find(|(a, _)| a.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: a.dim() });
        }
        let p = Polynomial { dim, terms };
        if p.degree() == 0 {
            return Err(Error::InvalidInput("polyhedron polynomials must be non-constant".into()));
        }
        Ok(p)
    }

    /// The coordinate function `z_var`.
    pub fn coordinate(dim: usize, var: usize) -> Self {
        Polynomial { dim, terms: vec![(MultiIndex::zero(dim).raised(var), Complex64::new(1.0, 0.0))] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(a, _)| a.order())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.terms.iter().map(|(a, c)| c * a.eval(z)).sum()
    }
}

/// The compact sets with a closed-form Green function.
#[derive(Clone, Debug)]
pub enum GreenKind {
    /// `[-1, 1]` in `C`.
    Interval,
    /// `{ [z - a] <= r }` for the chosen norm.
    ComplexBall { center: Vec<Complex64>, radius: f64, norm: BallNorm },
    /// `{ |p_j(z)| <= 1 for all j }`; the polynomials' top-degree parts must
    /// have no common zero except the origin.
    Polyhedron(Vec<Polynomial>),
    /// Cartesian product; each factor acts on consecutive coordinates.
    Product(Vec<GreenFunction>),
    /// Real unit ball of `R^d` inside `C^d`.
    RealBall,
    /// `[-1, 1]^d`.
    Cube,
    /// Standard simplex `{x >= 0, sum x <= 1}` of `R^d`.
    Simplex,
    /// `[-1, 1]^2` with the Green function adapted to tensor-degree
    /// polynomial spaces, `g(z1) + g(z2)`.
    TensorSquare,
    /// Compact set in `C` described by its exterior conformal map.
    ExternalConformal(ConformalMap),
}

/// A Green function with its ambient dimension.
#[derive(Clone, Debug)]
pub struct GreenFunction {
    kind: GreenKind,
    dim: usize,
}

impl GreenFunction {
    pub fn interval() -> Self {
        GreenFunction { kind: GreenKind::Interval, dim: 1 }
    }

    pub fn complex_ball(center: Vec<Complex64>, radius: f64, norm: BallNorm) -> Result<Self> {
        if center.is_empty() || !(radius > 0.0) {
            return Err(Error::InvalidInput("complex ball needs d >= 1 and radius > 0".into()));
        }
        let dim = center.len();
        Ok(GreenFunction { kind: GreenKind::ComplexBall { center, radius, norm }, dim })
    }

    pub fn polyhedron(polys: Vec<Polynomial>) -> Result<Self> {
        let dim = polys.first().map(|p| p.dim()).ok_or_else(|| {
            Error::InvalidInput("polyhedron needs at least one polynomial".into())
        })?;
        if let Some(p) = polys.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
        }
        Ok(GreenFunction { kind: GreenKind::Polyhedron(polys), dim })
    }

    /// Unit polydisk as the polyhedron of the coordinate functions.
    pub fn polydisk(dim: usize) -> Self {
        let polys = (0..dim).map(|v| Polynomial::coordinate(dim, v)).collect();
        GreenFunction { kind: GreenKind::Polyhedron(polys), dim }
    }

    pub fn product(factors: Vec<GreenFunction>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidInput("product needs at least one factor".into()));
        }
        let dim = factors.iter().map(|f| f.dim).sum();
        Ok(GreenFunction { kind: GreenKind::Product(factors), dim })
    }

    pub fn real_ball(dim: usize) -> Self {
        GreenFunction { kind: GreenKind::RealBall, dim }
    }

    pub fn cube(dim: usize) -> Self {
        GreenFunction { kind: GreenKind::Cube, dim }
    }

    pub fn simplex(dim: usize) -> Self {
        GreenFunction { kind: GreenKind::Simplex, dim }
    }

    pub fn tensor_square() -> Self {
        GreenFunction { kind: GreenKind::TensorSquare, dim: 2 }
    }

    /// Green function of the square for total-degree spaces: `max(g(z1), g(z2))`.
    pub fn graded_square() -> Self {
        Self::cube(2)
    }

    pub fn external(map: ConformalMap) -> Self {
        GreenFunction { kind: GreenKind::ExternalConformal(map), dim: 1 }
    }

    /// Build from a command-line style name: `interval`, `complex-ball`,
    /// `polydisk`, `real-ball`, `cube`, `simplex`, `tensor-square`,
    /// `graded-square`, `disk`, `ellipse:<a>,<b>`.
    pub fn from_name(name: &str, dim: usize) -> Result<Self> {
        let fixed = |want: usize, g: GreenFunction| {
            if dim == want {
                Ok(g)
            } else {
                Err(Error::DimensionMismatch { expected: want, found: dim })
            }
        };
        match name {
            "interval" => fixed(1, Self::interval()),
            "complex-ball" => Self::complex_ball(vec![Complex64::new(0.0, 0.0); dim.max(1)], 1.0, BallNorm::Euclidean),
            "polydisk" => Ok(Self::polydisk(dim.max(1))),
            "real-ball" => Ok(Self::real_ball(dim.max(1))),
            "cube" => Ok(Self::cube(dim.max(1))),
            "simplex" => Ok(Self::simplex(dim.max(1))),
            "tensor-square" => fixed(2, Self::tensor_square()),
            "graded-square" => fixed(2, Self::graded_square()),
            "disk" => fixed(1, Self::external(ConformalMap::disk(Complex64::new(0.0, 0.0), 1.0))),
            other => {
                if let Some(rest) = other.strip_prefix("ellipse:") {
                    let parts: Vec<f64> = rest
                        .split(',')
                        .map(|s| s.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| Error::InvalidInput(format!("ellipse axes: {e}")))?;
                    match parts.as_slice() {
                        [a, b] if *a > 0.0 && *b >= 0.0 && b <= a => {
                            fixed(1, Self::external(ConformalMap::ellipse(*a, *b)))
                        }
                        _ => Err(Error::InvalidInput("ellipse needs a,b with a >= b >= 0, a > 0".into())),
                    }
                } else {
                    Err(Error::InvalidInput(format!("unknown green kind `{other}`")))
                }
            }
        }
    }

    pub fn kind(&self) -> &GreenKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluate, checking the dimension of `z`.
    pub fn try_eval(&self, z: &[Complex64]) -> Result<f64> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: z.len() });
        }
        Ok(self.eval(z))
    }

    /// Evaluate at `z`; panics if `z` has the wrong length.
    pub fn eval(&self, z: &[Complex64]) -> f64 {
        assert_eq!(z.len(), self.dim, "green function dimension");
        match &self.kind {
            GreenKind::Interval => interval_green(z[0]),
            GreenKind::ComplexBall { center, radius, norm } => {
                let shifted: Vec<Complex64> = z.iter().zip(center).map(|(z, a)| z - a).collect();
                (norm.apply(&shifted) / radius).ln().max(0.0)
            }
            GreenKind::Polyhedron(polys) => polys
                .iter()
                .map(|p| p.eval(z).norm().ln().max(0.0) / p.degree() as f64)
                .fold(0.0, f64::max),
            GreenKind::Product(factors) => {
                let mut offset = 0;
                let mut best = 0.0f64;
                for f in factors {
                    best = best.max(f.eval(&z[offset..offset + f.dim]));
                    offset += f.dim;
                }
                best
            }
            GreenKind::RealBall => {
                let sq: f64 = z.iter().map(|c| c.norm_sqr()).sum();
                let dot: Complex64 = z.iter().map(|c| c * c).sum();
                0.5 * interval_green_above_one((sq - 1.0) + (dot - 1.0).norm())
            }
            GreenKind::Cube => z.iter().map(|c| interval_green(*c)).fold(0.0, f64::max),
            GreenKind::Simplex => {
                let abs: f64 = z.iter().map(|c| c.norm()).sum();
                let sum: Complex64 = z.iter().sum();
                interval_green_above_one((abs - 1.0) + (sum - 1.0).norm())
            }
            GreenKind::TensorSquare => interval_green(z[0]) + interval_green(z[1]),
            GreenKind::ExternalConformal(map) => map.phi(z[0]).norm().ln().max(0.0),
        }
    }

    /// Random points of the compact set on which the function vanishes.
    ///
    /// For the real sets (interval, cube, balls, simplex) these are points of
    /// the set itself, which is its own boundary in `C^d`. Returns `None` for
    /// a conformal map without inverse, or a polyhedron whose defining
    /// polynomials do not all have modulus below 1 at the origin.
    pub fn boundary_samples<R: Rng>(&self, count: usize, rng: &mut R) -> Option<Vec<Vec<Complex64>>> {
        (0..count).map(|_| self.boundary_point(rng)).collect()
    }

    fn boundary_point<R: Rng>(&self, rng: &mut R) -> Option<Vec<Complex64>> {
        let real = |x: f64| Complex64::new(x, 0.0);
        let d = self.dim;
        Some(match &self.kind {
            GreenKind::Interval => vec![real(rng.gen_range(-1.0..=1.0))],
            GreenKind::ComplexBall { center, radius, norm } => {
                let dir = complex_direction(d, rng);
                let scale = radius / norm.apply(&dir);
                dir.iter().zip(center).map(|(u, a)| a + u * scale).collect()
            }
            GreenKind::Polyhedron(polys) => polyhedron_boundary(polys, d, rng)?,
            GreenKind::Product(factors) => {
                let mut out = Vec::with_capacity(d);
                for f in factors {
                    out.extend(f.boundary_point(rng)?);
                }
                out
            }
            GreenKind::RealBall => {
                let dir: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let len = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                // Half of the samples on the sphere, the rest inside.
                let t = if rng.gen_bool(0.5) { 1.0 } else { rng.gen::<f64>() };
                let x: Vec<f64> = dir.iter().map(|x| t * x / len).collect();
                pull_inside(x, |x| x.iter().map(|v| v * v).sum()).into_iter().map(real).collect()
            }
            GreenKind::Cube | GreenKind::TensorSquare => {
                let face = rng.gen_range(0..d);
                (0..d)
                    .map(|j| {
                        if j == face {
                            real(if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
                        } else {
                            real(rng.gen_range(-1.0..=1.0))
                        }
                    })
                    .collect()
            }
            GreenKind::Simplex => {
                // Convex combination of the vertices 0, e_1, ..., e_d with one
                // vertex weight forced to zero, i.e. a point of a facet.
                let mut w: Vec<f64> = (0..=d).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
                let drop = rng.gen_range(0..=d);
                w[drop] = 0.0;
                let total: f64 = w.iter().sum();
                let x: Vec<f64> = (1..=d).map(|j| w[j] / total).collect();
                pull_inside(x, |x| x.iter().sum()).into_iter().map(real).collect()
            }
            GreenKind::ExternalConformal(map) => {
                vec![map.inverse(Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))?]
            }
        })
    }
}

impl fmt::Display for GreenFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            GreenKind::Interval => write!(f, "interval"),
            GreenKind::ComplexBall { norm, .. } => write!(f, "complex-ball({norm:?}, d={})", self.dim),
            GreenKind::Polyhedron(p) => write!(f, "polyhedron({} polynomials, d={})", p.len(), self.dim),
            GreenKind::Product(factors) => {
                write!(f, "product(")?;
                for (i, g) in factors.iter().enumerate() {
                    if i > 0 {
                        write!(f, " x ")?;
                    }
                    write!(f, "{g}")?;
                }
                write!(f, ")")
            }
            GreenKind::RealBall => write!(f, "real-ball(d={})", self.dim),
            GreenKind::Cube => write!(f, "cube(d={})", self.dim),
            GreenKind::Simplex => write!(f, "simplex(d={})", self.dim),
            GreenKind::TensorSquare => write!(f, "tensor-square"),
            GreenKind::ExternalConformal(map) => write!(f, "conformal({})", map.label()),
        }
    }
}

/// Shrink a sampled boundary point by a few ulps until `size(x) <= 1` holds
/// in floating point: the real-set Green functions grow like the square root
/// of the distance, so a point outside by one ulp would read as `1e-8`.
fn pull_inside(mut x: Vec<f64>, size: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    while size(&x) > 1.0 {
        for v in x.iter_mut() {
            *v *= 1.0 - f64::EPSILON;
        }
    }
    x
}

fn complex_direction<R: Rng>(d: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        if v.iter().any(|c| c.norm() > 1e-3) {
            return v;
        }
    }
}

/// Bisection along a random complex ray from the origin for `max |p_j| = 1`.
fn polyhedron_boundary<R: Rng>(polys: &[Polynomial], d: usize, rng: &mut R) -> Option<Vec<Complex64>> {
    let level = |z: &[Complex64]| polys.iter().map(|p| p.eval(z).norm()).fold(0.0, f64::max);
    let origin = vec![Complex64::new(0.0, 0.0); d];
    if level(&origin) >= 1.0 {
        return None;
    }
    let dir = complex_direction(d, rng);
    let at = |t: f64| dir.iter().map(|u| u * t).collect::<Vec<_>>();
    let mut hi = 1.0;
    let mut grow = 0;
    while level(&at(hi)) <= 1.0 {
        hi *= 2.0;
        grow += 1;
        if grow > 60 {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if level(&at(mid)) <= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Some(at(lo))
}
