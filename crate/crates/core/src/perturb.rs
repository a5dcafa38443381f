//! Kernels of nearby measures and of measures with added point masses.

use num_complex::Complex64;
use serde::Serialize;

use crate::cdkernel::KernelEngine;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::measures::DiscreteMeasure;
use crate::orthopoly::OrthoBasis;

/// `M_n(nu, mu) = int v_n^mu(z)^* v_n^mu(z) dnu(z)`.
#[derive(Clone, Debug)]
pub struct ModifiedMoments {
    pub matrix: CMatrix,
}

/// Gram matrix of the basis of `mu` under `nu`.
pub fn modified_moments(basis: &OrthoBasis, nu: &DiscreteMeasure) -> Result<ModifiedMoments> {
    if nu.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: nu.dim() });
    }
    let m = basis.len();
    let mut matrix = CMatrix::zeros(m, m);
    for (w, &s) in nu.atoms().iter().zip(nu.weights()) {
        let v = basis.evaluate(w);
        for j in 0..m {
            let cj = v[j].conj() * s;
            for l in 0..m {
                matrix[(j, l)] += v[l] * cj;
            }
        }
    }
    Ok(ModifiedMoments { matrix })
}

/// Mixed moments `R_n(nu, mu) = int v_n^nu(z)^* v_n^mu(z) dnu(z)`, integrated
/// against the measure of `basis_nu`.
pub fn mixed_moments(basis_nu: &OrthoBasis, basis_mu: &OrthoBasis) -> Result<CMatrix> {
    let nu = basis_nu.measure();
    if basis_mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch { expected: nu.dim(), found: basis_mu.dim() });
    }
    let vn = basis_nu.sample_values();
    let mut r = CMatrix::zeros(basis_nu.len(), basis_mu.len());
    for (i, (w, &s)) in nu.atoms().iter().zip(nu.weights()).enumerate() {
        let vm = basis_mu.evaluate(w);
        for j in 0..basis_nu.len() {
            let cj = vn[(i, j)].conj() * s;
            for l in 0..basis_mu.len() {
                r[(j, l)] += vm[l] * cj;
            }
        }
    }
    Ok(r)
}

/// Distance of `M_n(nu, mu)` from the identity.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClosenessReport {
    /// `||M - I||_2`; drives the bounds.
    pub epsilon_spectral: f64,
    /// `||M - I||_F`; diagnostic upper bound of the spectral value.
    pub epsilon_frobenius: f64,
    /// `epsilon_spectral < 1`.
    pub satisfied: bool,
}

pub fn closeness(moments: &ModifiedMoments) -> ClosenessReport {
    let m = moments.matrix.nrows();
    let diff = &moments.matrix - CMatrix::identity(m, m);
    let epsilon_spectral = linalg::hermitian_spectral_norm(&diff);
    let epsilon_frobenius = diff.norm();
    ClosenessReport {
        epsilon_spectral,
        epsilon_frobenius,
        satisfied: epsilon_spectral < 1.0,
    }
}

fn require_close(c: &ClosenessReport) -> Result<f64> {
    if !c.satisfied {
        return Err(Error::NotClose { epsilon: c.epsilon_spectral });
    }
    Ok(c.epsilon_spectral)
}

/// Intervals `[(1 - eps) K^nu, (1 + eps) K^nu]` that contain `K^mu(z, z)`.
pub fn two_measure_bounds(c: &ClosenessReport, k_nu: &[f64]) -> Result<Vec<(f64, f64)>> {
    let eps = require_close(c)?;
    Ok(k_nu.iter().map(|k| ((1.0 - eps) * k, (1.0 + eps) * k)).collect())
}

/// Bound `eps sqrt(K^nu(z,z) K^nu(w,w))` on `|K^mu(z,w) - K^nu(z,w)|`.
pub fn off_diagonal_bound(c: &ClosenessReport, k_nu_zz: f64, k_nu_ww: f64) -> Result<f64> {
    Ok(require_close(c)? * (k_nu_zz * k_nu_ww).sqrt())
}

/// Bound `2 eps` on `|C^mu(z,w) - C^nu(z,w)|`.
pub fn cosine_bound(c: &ClosenessReport) -> Result<f64> {
    Ok(2.0 * require_close(c)?)
}

/// Bound `2 sqrt(l (l - 1)) eps` on the Frobenius distance of `l x l` cosine matrices.
pub fn multipoint_cosine_bound(c: &ClosenessReport, l: usize) -> Result<f64> {
    Ok(2.0 * ((l * l.saturating_sub(1)) as f64).sqrt() * require_close(c)?)
}

/// Checks `(1 - eps) K^nu <= K^mu <= (1 + eps) K^nu` in the Loewner order,
/// allowing `tol` times the largest eigenvalue of `K^nu` as slack.
pub fn multipoint_contained(c: &ClosenessReport, k_mu: &CMatrix, k_nu: &CMatrix, tol: f64) -> Result<bool> {
    let eps = require_close(c)?;
    let scale = linalg::hermitian_spectral_norm(k_nu).max(f64::MIN_POSITIVE);
    let lower = k_mu - k_nu * Complex64::new(1.0 - eps, 0.0);
    let upper = k_nu * Complex64::new(1.0 + eps, 0.0) - k_mu;
    let min_eig = |m: &CMatrix| linalg::hermitian_eigen(m).0.first().copied().unwrap_or(0.0);
    Ok(min_eig(&lower) >= -tol * scale && min_eig(&upper) >= -tol * scale)
}

/// `K^nu(z, w) = v^mu(z) M_n(nu, mu)^{-1} v^mu(w)^*`.
pub fn transfer_kernel(
    basis_mu: &OrthoBasis,
    moments: &ModifiedMoments,
    z: &[Complex64],
    w: &[Complex64],
) -> Result<Complex64> {
    let vz = basis_mu.evaluate(z);
    let vw = basis_mu.evaluate(w);
    let x = linalg::cholesky_solve(&moments.matrix, &linalg::column(&vw.iter().map(|c| c.conj()).collect::<Vec<_>>()))?;
    Ok(vz.iter().zip(x.iter()).map(|(a, b)| a * b).sum())
}

/// Point masses `sigma = sum_j t_j delta_{z_j}`.
#[derive(Clone, Debug)]
pub struct MassPerturbation {
    pub masses: DiscreteMeasure,
}

impl MassPerturbation {
    pub fn new(points: Vec<Vec<Complex64>>, weights: Vec<f64>) -> Result<Self> {
        Ok(MassPerturbation { masses: DiscreteMeasure::new(points, weights)? })
    }

    pub fn points(&self) -> &[Vec<Complex64>] {
        self.masses.atoms()
    }

    pub fn weights(&self) -> &[f64] {
        self.masses.weights()
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }
}

/// Exact kernel ratio after adding point masses, with its alternating bounds.
#[derive(Clone, Debug, Serialize)]
pub struct PerturbationReport {
    /// `K^{mu+sigma}(z, z) / K^mu(z, z)`.
    pub exact_ratio: f64,
    /// `Sigma_0 = 1, Sigma_1, ..., Sigma_m`.
    pub sigma_chain: Vec<f64>,
    /// Cosine matrix of the mass points.
    #[serde(serialize_with = "ser_matrix")]
    pub c: CMatrix,
    /// Cosines `C(z, z_j)`.
    pub b: Vec<Complex64>,
    /// Diagonal of `D^2`, `1 / (t_j K(z_j, z_j))`.
    pub d2: Vec<f64>,
    /// Condition number of `C`.
    pub condition: f64,
    pub warnings: Vec<String>,
    /// Asymptotic value, when a ratio function was supplied.
    pub predictor: Option<f64>,
}

fn ser_matrix<S: serde::Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    rows.serialize(s)
}

impl PerturbationReport {
    /// Checks `Sigma_1 <= Sigma_3 <= ... <= ratio <= ... <= Sigma_2 <= Sigma_0`
    /// and returns the smallest slack (negative on violation).
    pub fn chain_slack(&self) -> f64 {
        let mut slack = f64::INFINITY;
        let s = &self.sigma_chain;
        for (m, &v) in s.iter().enumerate() {
            let d = if m % 2 == 1 { self.exact_ratio - v } else { v - self.exact_ratio };
            slack = slack.min(d);
            if m >= 2 {
                let step = if m % 2 == 1 { v - s[m - 2] } else { s[m - 2] - v };
                slack = slack.min(step);
            }
        }
        slack
    }
}

/// Warn when `C` is worse conditioned than this.
pub const CONDITION_WARNING: f64 = 1e12;

/// `K^{mu+sigma}(z,z) / K^mu(z,z) = 1 - b (D^2 + C)^{-1} b^*` and the chain
/// `Sigma_m = 1 - sum_{j<m} (-1)^j b C^{-1} (D^2 C^{-1})^j b^*` for `m = 0..=chain_depth`.
pub fn exact_mass_ratio(
    engine: &KernelEngine,
    perturbation: &MassPerturbation,
    z: &[Complex64],
    chain_depth: usize,
) -> Result<PerturbationReport> {
    let l = perturbation.len();
    if z.len() != engine.dim() || perturbation.masses.dim() != engine.dim() {
        return Err(Error::DimensionMismatch { expected: engine.dim(), found: z.len() });
    }
    let pts = perturbation.points();
    let t = perturbation.weights();
    let vz = engine.values(z);
    let kz: f64 = vz.iter().map(|x| x.norm_sqr()).sum();
    let vj: Vec<Vec<Complex64>> = pts.iter().map(|p| engine.values(p)).collect();
    let kj: Vec<f64> = vj.iter().map(|v| v.iter().map(|x| x.norm_sqr()).sum()).collect();
    if kz <= 0.0 || kj.iter().any(|&k| k <= 0.0) {
        return Err(Error::VanishingKernel);
    }
    let c = CMatrix::from_fn(l, l, |j, k| {
        if j == k {
            Complex64::new(1.0, 0.0)
        } else {
            linalg::dot_conj(&vj[j], &vj[k]) / (kj[j] * kj[k]).sqrt()
        }
    });
    let b: Vec<Complex64> = vj
        .iter()
        .zip(&kj)
        .map(|(v, k)| linalg::dot_conj(&vz, v) / (kz * k).sqrt())
        .collect();
    let d2: Vec<f64> = t.iter().zip(&kj).map(|(t, k)| 1.0 / (t * k)).collect();

    let (eig, vecs) = linalg::hermitian_eigen(&c);
    let (min, max) = (eig[0], eig[l - 1]);
    if !(min > 64.0 * f64::EPSILON * max) {
        let v = vecs.column(0);
        let mut involved: Vec<usize> = (0..l).filter(|&j| v[j].norm() > 0.1).collect();
        if involved.is_empty() {
            involved = (0..l).collect();
        }
        let names: Vec<String> = involved
            .iter()
            .map(|&j| format!("#{j} {:?}", pts[j].iter().map(|c| format!("{c}")).collect::<Vec<_>>()))
            .collect();
        return Err(Error::Singular(format!(
            "cosine matrix of the mass points is rank deficient; dependent points: {}",
            names.join(", ")
        )));
    }
    let condition = max / min;
    let mut warnings = Vec::new();
    if condition > CONDITION_WARNING {
        warnings.push(format!("cosine matrix condition number {condition:.3e} exceeds {CONDITION_WARNING:.0e}"));
    }

    let mut a = c.clone();
    for j in 0..l {
        a[(j, j)] += Complex64::new(d2[j], 0.0);
    }
    let b_adj = linalg::column(&b.iter().map(|x| x.conj()).collect::<Vec<_>>());
    let coincident = pts.iter().position(|p| p.as_slice() == z);
    let exact_ratio = match coincident {
        // b = e_m (A - D^2): 1 - b A^{-1} b^* = D_m^2 (1 - D_m^2 (A^{-1})_{mm}).
        Some(m) => {
            let mut e = CMatrix::zeros(l, 1);
            e[(m, 0)] = Complex64::new(1.0, 0.0);
            let x = linalg::cholesky_solve(&a, &e)?;
            d2[m] * (1.0 - d2[m] * x[(m, 0)].re)
        }
        None => {
            let x = linalg::cholesky_solve(&a, &b_adj)?;
            let q: Complex64 = b.iter().zip(x.iter()).map(|(bj, xj)| bj * xj).sum();
            1.0 - q.re
        }
    };

    let mut sigma_chain = vec![1.0];
    let mut x = linalg::cholesky_solve(&c, &b_adj)?;
    let mut acc = 0.0;
    for j in 0..chain_depth {
        let term: Complex64 = b.iter().zip(x.iter()).map(|(bj, xj)| bj * xj).sum();
        acc += if j % 2 == 0 { term.re } else { -term.re };
        sigma_chain.push(1.0 - acc);
        let mut y = x.clone();
        for k in 0..l {
            y[(k, 0)] *= d2[k];
        }
        x = linalg::cholesky_solve(&c, &y)?;
    }

    Ok(PerturbationReport {
        exact_ratio,
        sigma_chain,
        c,
        b,
        d2,
        condition,
        warnings,
        predictor: None,
    })
}

/// `Sigma_1` as the determinant quotient `det C~ / det C`, where `C~` is the
/// cosine matrix of `(z, z_1, ..., z_l)`.
pub fn sigma1_schur(c: &CMatrix, b: &[Complex64]) -> f64 {
    let l = c.nrows();
    let mut ext = CMatrix::zeros(l + 1, l + 1);
    ext[(0, 0)] = Complex64::new(1.0, 0.0);
    for j in 0..l {
        ext[(0, j + 1)] = b[j];
        ext[(j + 1, 0)] = b[j].conj();
        for k in 0..l {
            ext[(j + 1, k + 1)] = c[(j, k)];
        }
    }
    (linalg::determinant(&ext) / linalg::determinant(c)).re
}

/// `Sigma_2 - Sigma_1` by Cramer's rule: `sum_j |det C_j|^2 / |det C|^2 * D_j^2`,
/// with `C_j` the cosine matrix whose `j`-th row is replaced by `b`.
pub fn sigma2_gap_cramer(c: &CMatrix, b: &[Complex64], d2: &[f64]) -> f64 {
    let l = c.nrows();
    let det = linalg::determinant(c).norm_sqr();
    (0..l)
        .map(|j| {
            let mut cj = c.clone();
            for k in 0..l {
                cj[(j, k)] = b[k];
            }
            linalg::determinant(&cj).norm_sqr() / det * d2[j]
        })
        .sum()
}

/// Asymptotic value of the kernel ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Prediction {
    /// `|prod_j (g(z) - g(z_j)) / (1 - g(z) conj(g(z_j)))|^2`.
    Ratio(f64),
    /// At a mass point the perturbed diagonal kernel tends to `1 / t_m`.
    PointMass { index: usize, kernel: f64 },
}

fn check_unit_disk(g: Complex64, what: &str) -> Result<()> {
    if !(g.norm() < 1.0) {
        return Err(Error::Domain(format!("|g({what})| = {} is not below 1", g.norm())));
    }
    Ok(())
}

/// Blaschke-type product `prod_j (g - g_j) / (1 - g conj(g_j))`.
pub fn blaschke_product(g: Complex64, gj: &[Complex64]) -> Complex64 {
    gj.iter()
        .map(|a| (g - a) / (Complex64::new(1.0, 0.0) - g * a.conj()))
        .product()
}

/// Limit of `K^{mu+sigma}(z, z) / K^mu(z, z)` given the ratio function `g`.
pub fn asymptotic_ratio_predictor<G>(g: G, perturbation: &MassPerturbation, z: &[Complex64]) -> Result<Prediction>
where
    G: Fn(&[Complex64]) -> Complex64,
{
    let pts = perturbation.points();
    let gj: Vec<Complex64> = pts.iter().map(|p| g(p)).collect();
    for (j, v) in gj.iter().enumerate() {
        check_unit_disk(*v, &format!("z_{j}"))?;
        for k in 0..j {
            if (gj[k] - v).norm() <= 1e-14 {
                return Err(Error::Degenerate(format!("g(z_{k}) and g(z_{j}) coincide")));
            }
        }
    }
    if let Some(m) = pts.iter().position(|p| p.as_slice() == z) {
        return Ok(Prediction::PointMass { index: m, kernel: 1.0 / perturbation.weights()[m] });
    }
    let gz = g(z);
    check_unit_disk(gz, "z")?;
    Ok(Prediction::Ratio(blaschke_product(gz, &gj).norm_sqr()))
}

/// Limit modulus `sqrt((1 - |g(z)|^2)(1 - |g(w)|^2)) / |1 - g(z) conj(g(w))|` of the cosine.
pub fn cosine_asymptotic(gz: Complex64, gw: Complex64) -> Result<f64> {
    check_unit_disk(gz, "z")?;
    check_unit_disk(gw, "w")?;
    Ok(((1.0 - gz.norm_sqr()) * (1.0 - gw.norm_sqr())).sqrt() / (Complex64::new(1.0, 0.0) - gz * gw.conj()).norm())
}

/// Limit of `|det C(z_1..z_l, z; w_1..w_l, w)| / |det C(z_1..z_l; w_1..w_l)|`
/// in terms of the ratio-function values.
pub fn determinant_ratio_asymptotic(
    gz: Complex64,
    gw: Complex64,
    gz_list: &[Complex64],
    gw_list: &[Complex64],
) -> Result<f64> {
    if gz_list.len() != gw_list.len() {
        return Err(Error::InvalidInput("point lists must have equal length".into()));
    }
    for g in gz_list.iter().chain(gw_list) {
        check_unit_disk(*g, "list point")?;
    }
    let base = cosine_asymptotic(gz, gw)?;
    Ok(base * blaschke_product(gz, gz_list).norm() * blaschke_product(gw, gw_list).norm())
}

/// `det (1 / (1 - a_j conj(b_k)))` by the closed product formula.
pub fn pick_determinant_closed(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let l = a.len();
    let one = Complex64::new(1.0, 0.0);
    let mut num = one;
    for j in 0..l {
        for k in (j + 1)..l {
            num *= (a[k] - a[j]) * (b[k].conj() - b[j].conj());
        }
    }
    let mut den = one;
    for aj in a {
        for bk in b {
            den *= one - aj * bk.conj();
        }
    }
    num / den
}

/// `det (1 / (1 - a_j conj(b_k)))` by LU.
pub fn pick_determinant_direct(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let l = a.len();
    let m = CMatrix::from_fn(l, l, |j, k| Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - a[j] * b[k].conj()));
    linalg::determinant(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::MonomialOrdering;
    use crate::orthopoly::{orthonormalize, GramSchmidtConfig};
    use crate::sampling;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn basis(mu: &DiscreteMeasure, n: usize) -> OrthoBasis {
        orthonormalize(mu, &MonomialOrdering::graded_lex(mu.dim()), n, &GramSchmidtConfig::default()).unwrap()
    }

    #[test]
    fn modified_moments_of_self_and_double() {
        let mut r = sampling::rng(11);
        let mu = sampling::random_cloud(1, 40, &mut r);
        let b = basis(&mu, 8);
        let m = modified_moments(&b, &mu).unwrap();
        assert!(closeness(&m).epsilon_spectral < 1e-13);
        let m2 = modified_moments(&b, &mu.scaled(2.0).unwrap()).unwrap();
        assert!((m2.matrix - CMatrix::identity(9, 9) * c(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn refusal_when_not_close() {
        let rep = ClosenessReport { epsilon_spectral: 1.2, epsilon_frobenius: 1.5, satisfied: false };
        assert!(matches!(two_measure_bounds(&rep, &[1.0]), Err(Error::NotClose { .. })));
        assert!(cosine_bound(&rep).is_err());
        let rep = ClosenessReport { epsilon_spectral: 0.0, epsilon_frobenius: 0.0, satisfied: true };
        assert_eq!(two_measure_bounds(&rep, &[3.0]).unwrap(), vec![(3.0, 3.0)]);
    }

    #[test]
    fn single_mass_closed_form() {
        let mut r = sampling::rng(12);
        let mu = sampling::random_cloud(1, 60, &mut r);
        let e = KernelEngine::new(basis(&mu, 6));
        let z1 = vec![c(1.7, 0.4)];
        let t1 = 0.3;
        let p = MassPerturbation::new(vec![z1.clone()], vec![t1]).unwrap();
        let z = [c(-0.2, 0.9)];
        let rep = exact_mass_ratio(&e, &p, &z, 3).unwrap();
        let cz = e.cosine(&z, &z1).unwrap().modulus();
        let want = 1.0 - cz * cz / (1.0 + 1.0 / (t1 * e.diagonal(&z1)));
        assert!((rep.exact_ratio - want).abs() < 1e-13);
        let at = exact_mass_ratio(&e, &p, &z1, 3).unwrap();
        let k1 = e.diagonal(&z1);
        assert!((at.exact_ratio - 1.0 / (1.0 + t1 * k1)).abs() < 1e-13);
    }

    #[test]
    fn pick_identity_small() {
        let a = [c(0.1, 0.2), c(-0.5, 0.1), c(0.3, -0.6)];
        let b = [c(0.4, 0.0), c(0.0, 0.7), c(-0.2, -0.2)];
        let d = pick_determinant_direct(&a, &b);
        let p = pick_determinant_closed(&a, &b);
        assert!((d - p).norm() < 1e-13 * d.norm().max(1.0));
    }

    #[test]
    fn predictor_edge_cases() {
        let p = MassPerturbation::new(vec![vec![c(2.0, 0.0)]], vec![0.25]).unwrap();
        let g = |z: &[Complex64]| 1.0 / z[0];
        assert_eq!(
            asymptotic_ratio_predictor(g, &p, &[c(2.0, 0.0)]).unwrap(),
            Prediction::PointMass { index: 0, kernel: 4.0 }
        );
        let p2 = MassPerturbation::new(vec![vec![c(2.0, 0.0)], vec![c(3.0, 0.0)]], vec![1.0, 1.0]).unwrap();
        let coincide = |_: &[Complex64]| c(0.5, 0.0);
        assert!(matches!(asymptotic_ratio_predictor(coincide, &p2, &[c(4.0, 0.0)]), Err(Error::Degenerate(_))));
        assert!(matches!(asymptotic_ratio_predictor(g, &p, &[c(0.5, 0.0)]), Err(Error::Domain(_))));
        assert!((cosine_asymptotic(c(0.3, 0.1), c(0.3, 0.1)).unwrap() - 1.0).abs() < 1e-15);
        assert!(blaschke_product(c(0.5, 0.0), &[c(0.5, 0.0)]).norm() == 0.0);
    }
}
