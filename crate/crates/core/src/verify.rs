//! Cross-checks between the numerical pipeline and the closed-form oracles.
//!
//! [`run_checks`] evaluates every row against the constants in
//! [`OracleConstants`]; tests feed in a corrupted constant to make sure the
//! corresponding row actually fails.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::cdkernel::{mahalanobis, KernelEngine, ThresholdPolicy};
use crate::error::Result;
use crate::measures::MonomialOrdering;
use crate::orthopoly::{orthonormalize, GramSchmidtConfig};
use crate::quadrature;
use crate::reference::conformal::ConformalMap;
use crate::reference::green::{interval_green, BallNorm, GreenFunction};
use crate::reference::kernels;
use crate::sampling::{self, rng};

/// Reference values the checks compare against.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleConstants {
    /// Interval Green function at `z = 1.25`.
    pub interval_at_five_quarters: f64,
    /// Disk kernel at the origin.
    pub disk_origin: f64,
    /// Maximum of the disk kernel on the disk for `n = 3`.
    pub disk_max_n3: f64,
    /// Tensor Chebyshev kernel at the corner `(1, 1)` for `n = 2`.
    pub chebyshev_corner_n2: u128,
    /// Ball kernel, `d = 2`, `n = 1`, at unit pairing.
    pub ball_unit_pairing_d2_n1: f64,
    /// Ball Bergman kernel, `d = 2`, at pairing `1/2`.
    pub ball_bergman_d2_half: f64,
}

impl Default for OracleConstants {
    fn default() -> Self {
        OracleConstants {
            interval_at_five_quarters: std::f64::consts::LN_2,
            disk_origin: 1.0 / PI,
            disk_max_n3: 10.0 / PI,
            chebyshev_corner_n2: 25,
            ball_unit_pairing_d2_n1: 8.0 / (PI * PI),
            ball_bergman_d2_half: 16.0 / (PI * PI),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckTable {
    pub rows: Vec<CheckRow>,
}

impl CheckTable {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn row(&self, name: &str) -> Option<&CheckRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    /// Fixed-width text table, one row per check.
    pub fn render(&self) -> String {
        let width = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for r in &self.rows {
            let status = if r.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{status}  {:width$}  {}", r.name, r.detail);
        }
        let passed = self.rows.iter().filter(|r| r.passed).count();
        let _ = writeln!(out, "{passed}/{} checks passed", self.rows.len());
        out
    }
}

type Check = fn(&OracleConstants) -> Result<(bool, String)>;

/// Names of all checks in execution order.
pub fn check_names() -> Vec<&'static str> {
    checks().iter().map(|(n, _)| *n).collect()
}

fn checks() -> Vec<(&'static str, Check)> {
    vec![
        ("interval-green-values", interval_values),
        ("green-nonnegative-and-boundary", green_boundary),
        ("green-product-rule", green_product),
        ("green-cube-as-product", green_cube),
        ("disk-kernel-constants", disk_constants),
        ("disk-quadrature-vs-closed-form", disk_quadrature),
        ("disk-exterior-predictor", disk_exterior),
        ("ellipse-ratio-predictor", ellipse_ratio),
        ("chebyshev-corner-integer", chebyshev_corner),
        ("chebyshev-quadrature-vs-closed-form", chebyshev_quadrature),
        ("ball-kernel-constants", ball_constants),
        ("polydisk-bergman-limit", polydisk_limit),
        ("trace-identity", trace_identity),
        ("leverage-bounds", leverage_bounds),
        ("mahalanobis-identity", mahalanobis_identity),
    ]
}

/// Run every check; errors inside a check become failed rows.
pub fn run_checks(constants: &OracleConstants) -> CheckTable {
    let rows = checks()
        .into_iter()
        .map(|(name, f)| match f(constants) {
            Ok((passed, detail)) => CheckRow { name: name.to_string(), passed, detail },
            Err(e) => CheckRow { name: name.to_string(), passed: false, detail: format!("error: {e}") },
        })
        .collect();
    CheckTable { rows }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn interval_values(k: &OracleConstants) -> Result<(bool, String)> {
    let at_one = interval_green(c(1.0, 0.0));
    let at = interval_green(c(1.25, 0.0));
    // Independent form: log(h + sqrt(h^2 - 1)), h = (|z-1| + |z+1|)/2.
    let mut r = rng(11);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let z = c(r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0));
        let h = 0.5 * ((z - 1.0).norm() + (z + 1.0).norm());
        let alt = (h + (h * h - 1.0).max(0.0).sqrt()).ln();
        worst = worst.max((interval_green(z) - alt).abs());
    }
    let ok = at_one == 0.0 && (at - k.interval_at_five_quarters).abs() < 1e-14 && worst < 1e-12;
    Ok((ok, format!("g(1)={at_one:e} g(1.25)={at:.15} focal-form gap={worst:.1e}")))
}

fn catalog() -> Result<Vec<GreenFunction>> {
    Ok(vec![
        GreenFunction::interval(),
        GreenFunction::complex_ball(vec![c(0.2, -0.1), c(0.0, 0.5)], 1.5, BallNorm::Euclidean)?,
        GreenFunction::complex_ball(vec![c(0.0, 0.0); 3], 0.7, BallNorm::Sum)?,
        GreenFunction::polydisk(2),
        GreenFunction::product(vec![GreenFunction::interval(), GreenFunction::real_ball(2)])?,
        GreenFunction::real_ball(3),
        GreenFunction::cube(3),
        GreenFunction::simplex(2),
        GreenFunction::tensor_square(),
        GreenFunction::external(ConformalMap::ellipse(1.5, 0.5)),
        GreenFunction::external(ConformalMap::disk(c(0.3, 0.3), 0.8)),
    ])
}

fn green_boundary(_: &OracleConstants) -> Result<(bool, String)> {
    let mut r = rng(12);
    let mut worst_boundary = 0.0f64;
    let mut min_value = f64::INFINITY;
    for g in catalog()? {
        let pts = g.boundary_samples(200, &mut r).expect("catalog kinds sample their boundary");
        for z in pts {
            worst_boundary = worst_boundary.max(g.eval(&z));
        }
        for _ in 0..200 {
            let z: Vec<Complex64> = (0..g.dim()).map(|_| c(r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0))).collect();
            min_value = min_value.min(g.eval(&z));
        }
    }
    let ok = worst_boundary <= 1e-10 && min_value >= 0.0;
    Ok((ok, format!("max on boundary={worst_boundary:.1e} min anywhere={min_value:.1e}")))
}

fn green_product(_: &OracleConstants) -> Result<(bool, String)> {
    let k = GreenFunction::real_ball(2);
    let l = GreenFunction::external(ConformalMap::ellipse(1.0, 0.4));
    let prod = GreenFunction::product(vec![k.clone(), l.clone()])?;
    let mut r = rng(13);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let z: Vec<Complex64> = (0..3).map(|_| c(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0))).collect();
        let want = k.eval(&z[..2]).max(l.eval(&z[2..]));
        worst = worst.max((prod.eval(&z) - want).abs());
    }
    Ok((worst <= 1e-10, format!("max deviation {worst:.1e}")))
}

fn green_cube(_: &OracleConstants) -> Result<(bool, String)> {
    let cube = GreenFunction::cube(3);
    let prod = GreenFunction::product(vec![GreenFunction::interval(); 3])?;
    let mut r = rng(14);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let z: Vec<Complex64> = (0..3).map(|_| c(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0))).collect();
        let direct = z.iter().map(|x| interval_green(*x)).fold(0.0, f64::max);
        worst = worst.max((cube.eval(&z) - prod.eval(&z)).abs()).max((cube.eval(&z) - direct).abs());
    }
    Ok((worst <= 1e-10, format!("max deviation {worst:.1e}")))
}

fn disk_constants(k: &OracleConstants) -> Result<(bool, String)> {
    let origin = kernels::bergman_disk_kernel(5, c(0.0, 0.0), c(0.0, 0.0)).re;
    let on_circle = (0..64)
        .map(|j| {
            let z = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / 64.0);
            kernels::bergman_disk_kernel(3, z, z).re
        })
        .fold(0.0, f64::max);
    let ok = (origin - k.disk_origin).abs() < 1e-14
        && (kernels::bergman_disk_max(3) - k.disk_max_n3).abs() < 1e-14
        && (on_circle - k.disk_max_n3).abs() < 1e-12;
    Ok((ok, format!("K(0,0)={origin:.12} max_3={on_circle:.12}")))
}

fn disk_quadrature(_: &OracleConstants) -> Result<(bool, String)> {
    let n = 12;
    let q = quadrature::disk_area(n)?;
    let basis = orthonormalize(&q.measure, &MonomialOrdering::graded_lex(1), n, &GramSchmidtConfig::default())?;
    let engine = KernelEngine::new(basis);
    let mut r = rng(15);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let z = sampling::disk_point(1.5, &mut r);
        let w = sampling::disk_point(1.5, &mut r);
        let got = engine.kernel(&[z], &[w]);
        let want = kernels::bergman_disk_kernel(n, z, w);
        worst = worst.max((got - want).norm() / want.norm());
    }
    Ok((worst <= 1e-8, format!("n={n} max relative error {worst:.1e}")))
}

fn disk_exterior(_: &OracleConstants) -> Result<(bool, String)> {
    let n = 50;
    let q = quadrature::disk_area(n)?;
    let basis = orthonormalize(&q.measure, &MonomialOrdering::graded_lex(1), n, &GramSchmidtConfig::default())?;
    let engine = KernelEngine::new(basis);
    let map = ConformalMap::disk(c(0.0, 0.0), 1.0);
    let z = c(1.3, 0.0);
    let got = engine.diagonal(&[z]);
    let want = kernels::bergman_predictors(&map, n, z)?.exterior_kernel;
    let err = rel(got, want);
    Ok((err <= 0.05, format!("z=1.3 n={n} relative gap {err:.4}")))
}

fn ellipse_ratio(_: &OracleConstants) -> Result<(bool, String)> {
    let n = 60;
    let map = ConformalMap::ellipse(1.5, 0.5);
    let q = quadrature::ellipse_area(1.5, 0.5, n + 1)?;
    let basis = orthonormalize(&q.measure, &MonomialOrdering::graded_lex(1), n + 1, &GramSchmidtConfig::default())?;
    let mut worst = 0.0f64;
    for z in [c(2.0, 0.0), c(0.0, 1.5), c(-1.4, 1.2)] {
        let v = basis.evaluate(&[z]);
        let ratio = v[n] / v[n + 1];
        let want = kernels::bergman_predictors(&map, n, z)?.ratio;
        worst = worst.max((ratio - want).norm() / want.norm());
    }
    Ok((worst <= 0.05, format!("n={n} max relative gap {worst:.4}")))
}

fn chebyshev_corner(k: &OracleConstants) -> Result<(bool, String)> {
    let n2 = kernels::chebyshev_corner_value(2, 2);
    let all = (0..=10u128).all(|n| kernels::chebyshev_corner_value(n as usize, 2) == Some((2 * n + 1).pow(2)));
    let float = kernels::chebyshev_tensor_kernel(2, &[c(1.0, 0.0); 2], &[c(1.0, 0.0); 2]).re;
    let ok = n2 == Some(k.chebyshev_corner_n2) && all && float == k.chebyshev_corner_n2 as f64;
    Ok((ok, format!("K((1,1),(1,1)) at n=2 = {n2:?}; n<=10 closed form {all}")))
}

fn chebyshev_quadrature(_: &OracleConstants) -> Result<(bool, String)> {
    let n = 6;
    let q = quadrature::chebyshev_tensor(2, n + 1)?;
    let ordering = MonomialOrdering::tensor(2, n as u32);
    let count = (n + 1) * (n + 1);
    let basis = orthonormalize(&q.measure, &ordering, count - 1, &GramSchmidtConfig::default())?;
    let engine = KernelEngine::new(basis);
    let mut r = rng(16);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let z = [c(r.gen_range(-1.0..1.0), 0.0), c(r.gen_range(-1.0..1.0), 0.0)];
        let got = engine.diagonal(&z);
        let want = kernels::chebyshev_tensor_kernel(n, &z, &z).re;
        worst = worst.max(rel(got, want));
    }
    Ok((worst <= 1e-8, format!("n={n} max relative error {worst:.1e}")))
}

fn ball_constants(k: &OracleConstants) -> Result<(bool, String)> {
    let z = [c(0.6, 0.0), c(0.0, 0.8)];
    let unit = kernels::complex_ball_kernel(2, 1, &z, &z).re;
    let half = [c(0.5, 0.0), c(0.0, 0.0)];
    let e1 = [c(1.0, 0.0), c(0.0, 0.0)];
    let series = kernels::complex_ball_kernel(2, 60, &half, &e1);
    let limit = kernels::complex_ball_bergman(2, c(0.5, 0.0));
    let ok = (unit - k.ball_unit_pairing_d2_n1).abs() < 1e-13
        && (kernels::complex_ball_unit_pairing(2, 1) - k.ball_unit_pairing_d2_n1).abs() < 1e-13
        && (limit.re - k.ball_bergman_d2_half).abs() < 1e-13
        && (series.re - k.ball_bergman_d2_half).abs() < 1e-6;
    Ok((ok, format!("unit pairing {unit:.12}; series at 1/2 {:.12}", series.re)))
}

fn polydisk_limit(_: &OracleConstants) -> Result<(bool, String)> {
    let z = [c(0.4, 0.0), c(0.0, 0.3)];
    let got = kernels::polydisk_kernel(2, 80, &z, &z);
    let want = kernels::polydisk_bergman(&z, &z);
    let gap = (got - want).norm();
    Ok((gap <= 1e-6, format!("n=80 gap {gap:.1e}")))
}

fn trace_identity(_: &OracleConstants) -> Result<(bool, String)> {
    let mut r = rng(17);
    let mut worst = 0.0f64;
    for trial in 0..10 {
        let dim = 1 + trial % 3;
        let cloud = sampling::random_cloud(dim, 40, &mut r);
        let n = 15;
        let basis = orthonormalize(&cloud, &MonomialOrdering::graded_lex(dim), n, &GramSchmidtConfig::default())?;
        let m = basis.len();
        let engine = KernelEngine::new(basis);
        let report = engine.leverage_scores(ThresholdPolicy::default());
        worst = worst.max((report.score_sum - m as f64).abs());
    }
    Ok((worst <= 1e-10, format!("max |sum t K - (n+1)| = {worst:.1e}")))
}

fn leverage_bounds(_: &OracleConstants) -> Result<(bool, String)> {
    let cloud = sampling::disk_with_outliers(60, 3, 18);
    let basis = orthonormalize(&cloud.measure, &MonomialOrdering::graded_lex(1), 10, &GramSchmidtConfig::default())?;
    let scores = KernelEngine::new(basis).leverage_scores(ThresholdPolicy::default()).scores;
    let in_range = scores.iter().all(|&s| s > 0.0 && s <= 1.0 + 1e-10);
    let small = sampling::random_cloud(1, 8, &mut rng(19));
    let full = orthonormalize(&small, &MonomialOrdering::graded_lex(1), 7, &GramSchmidtConfig::default())?;
    let full_scores = KernelEngine::new(full).leverage_scores(ThresholdPolicy::default()).scores;
    let worst_full = full_scores.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
    Ok((in_range && worst_full <= 1e-10, format!("scores in (0,1]: {in_range}; full rank gap {worst_full:.1e}")))
}

fn mahalanobis_identity(_: &OracleConstants) -> Result<(bool, String)> {
    let mut r = rng(20);
    let mut worst = 0.0f64;
    for dim in 1..=3 {
        let cloud = sampling::random_cloud(dim, 30, &mut r);
        let basis = orthonormalize(&cloud, &MonomialOrdering::graded_lex(dim), dim, &GramSchmidtConfig::default())?;
        let engine = KernelEngine::new(basis);
        for _ in 0..20 {
            let z: Vec<Complex64> = (0..dim).map(|_| c(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0))).collect();
            let delta = mahalanobis(&cloud, &z)?;
            let k = engine.diagonal(&z) * cloud.total_mass();
            worst = worst.max(rel(k, 1.0 + delta * delta));
        }
    }
    Ok((worst <= 1e-8, format!("max relative gap {worst:.1e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corrupted_constant_fails_its_row() {
        let bad = OracleConstants { disk_max_n3: 3.0, ..OracleConstants::default() };
        let row = disk_constants(&bad).unwrap();
        assert!(!row.0);
        let good = disk_constants(&OracleConstants::default()).unwrap();
        assert!(good.0, "{}", good.1);
    }

    #[test]
    fn names_are_unique() {
        let mut names = check_names();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), checks().len());
    }
}
