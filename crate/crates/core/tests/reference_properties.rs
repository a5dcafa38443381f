//! Randomized invariants of the Green functions and closed-form kernels.

use christoffel::measures::MonomialOrdering;
use christoffel::orthopoly::{orthonormalize, GramSchmidtConfig};
use christoffel::perturb::{pick_determinant_closed, pick_determinant_direct};
use christoffel::quadrature;
use christoffel::reference::{
    chebyshev_tensor_kernel, complex_ball_kernel, interval_green, BallNorm, ConformalMap, GreenFunction, Polynomial,
};
use christoffel::cdkernel::KernelEngine;
use christoffel::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() }
}

fn cplx(bound: f64) -> impl Strategy<Value = Complex64> {
    (-bound..bound, -bound..bound).prop_map(|(re, im)| c(re, im))
}

fn cvec(dim: usize, bound: f64) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(cplx(bound), dim)
}

/// Joukowski parameter with `|u| >= 1`, computed from the focal distances.
fn outer_parameter(z: Complex64) -> Complex64 {
    let h = 0.5 * ((z - 1.0).norm() + (z + 1.0).norm());
    let modulus = h + (h * h - 1.0).max(0.0).sqrt();
    let r = (z * z - 1.0).sqrt();
    let u = if (z + r).norm() >= (z - r).norm() { z + r } else { z - r };
    u * (modulus / u.norm())
}

/// `T_k(z) = (u^k + u^{-k}) / 2`.
fn chebyshev_t(k: usize, z: Complex64) -> Complex64 {
    let u = outer_parameter(z);
    0.5 * (u.powu(k as u32) + u.powu(k as u32).inv())
}

/// Graded-degree-`n` kernel of the product arcsine measure on the square:
/// `sum_{a+b<=n} |p_a(z1)|^2 |p_b(z2)|^2` with `p_0 = 1`, `p_k = sqrt(2) T_k`.
fn graded_square_kernel(n: usize, z: &[Complex64]) -> f64 {
    let p2 = |k: usize, x: Complex64| if k == 0 { 1.0 } else { 2.0 * chebyshev_t(k, x).norm_sqr() };
    (0..=n).flat_map(|a| (0..=n - a).map(move |b| (a, b))).map(|(a, b)| p2(a, z[0]) * p2(b, z[1])).sum()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn green_functions_are_nonnegative(z in cvec(3, 4.0)) {
        let catalog = [
            GreenFunction::polydisk(3),
            GreenFunction::real_ball(3),
            GreenFunction::cube(3),
            GreenFunction::simplex(3),
            GreenFunction::complex_ball(vec![c(0.5, 0.0), c(0.0, 0.0), c(0.0, -0.5)], 0.9, BallNorm::Max).unwrap(),
        ];
        for g in &catalog {
            let v = g.eval(&z);
            prop_assert!(v >= 0.0 && v.is_finite(), "{g}: {v}");
        }
    }

    #[test]
    fn product_is_max_of_factors(z in cvec(4, 3.0)) {
        let parts = [GreenFunction::simplex(2), GreenFunction::interval(), GreenFunction::external(ConformalMap::ellipse(2.0, 1.0))];
        let prod = GreenFunction::product(parts.to_vec()).unwrap();
        let want = parts[0].eval(&z[..2]).max(parts[1].eval(&z[2..3])).max(parts[2].eval(&z[3..]));
        prop_assert!((prod.eval(&z) - want).abs() <= 1e-12 * want.max(1.0));
    }

    #[test]
    fn coordinate_polyhedron_is_polydisk(z in cvec(2, 3.0)) {
        let poly = GreenFunction::polyhedron(vec![Polynomial::coordinate(2, 0), Polynomial::coordinate(2, 1)]).unwrap();
        prop_assert!((poly.eval(&z) - GreenFunction::polydisk(2).eval(&z)).abs() <= 1e-12);
        let cube = GreenFunction::cube(2);
        prop_assert!((GreenFunction::graded_square().eval(&z) - cube.eval(&z)).abs() <= 1e-15);
    }

    #[test]
    fn one_dimensional_sets_reduce_to_interval(z in cplx(4.0)) {
        let gi = interval_green(z);
        prop_assert!((GreenFunction::real_ball(1).eval(&[z]) - gi).abs() <= 1e-12 * gi.max(1.0));
        // The simplex in one variable is [0, 1].
        let gs = interval_green(2.0 * z - 1.0);
        prop_assert!((GreenFunction::simplex(1).eval(&[z]) - gs).abs() <= 1e-12 * gs.max(1.0));
        let flat = GreenFunction::external(ConformalMap::ellipse(1.0, 0.0));
        prop_assert!((flat.eval(&[z]) - gi).abs() <= 1e-12 * gi.max(1.0));
    }

    #[test]
    fn disk_green_is_log_plus(z in cplx(4.0), re in -1.0f64..1.0, r in 0.2f64..2.0) {
        let center = c(re, -re);
        let want = ((z - center).norm() / r).ln().max(0.0);
        let ball = GreenFunction::complex_ball(vec![center], r, BallNorm::Euclidean).unwrap();
        let conformal = GreenFunction::external(ConformalMap::disk(center, r));
        prop_assert!((ball.eval(&[z]) - want).abs() <= 1e-12);
        prop_assert!((conformal.eval(&[z]) - want).abs() <= 1e-12);
    }

    #[test]
    fn polydisk_is_log_homogeneous_outside(z in cvec(2, 2.0), s in 1.0f64..5.0, theta in 0.0f64..std::f64::consts::TAU) {
        let g = GreenFunction::polydisk(2);
        prop_assume!(g.eval(&z) > 0.0);
        let lambda = Complex64::from_polar(s, theta);
        let scaled: Vec<Complex64> = z.iter().map(|v| v * lambda).collect();
        prop_assert!((g.eval(&scaled) - g.eval(&z) - s.ln()).abs() <= 1e-12);
    }

    #[test]
    fn pick_determinant_closed_form(a in cvec(4, 0.65), b in cvec(4, 0.65), l in 1usize..=4) {
        let closed = pick_determinant_closed(&a[..l], &b[..l]);
        let direct = pick_determinant_direct(&a[..l], &b[..l]);
        prop_assert!((closed - direct).norm() <= 1e-10 * direct.norm().max(1e-3));
    }

    #[test]
    fn ball_cosine_decays_for_non_parallel_points(z in cvec(2, 2.0), w in cvec(2, 2.0)) {
        let nz: f64 = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let nw: f64 = w.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let p: Complex64 = z.iter().zip(&w).map(|(a, b)| a * b.conj()).sum();
        prop_assume!(nz > 1.05 && nw > 1.05 && p.norm() / (nz * nw) < 0.8);
        let cosine = |n: usize| {
            complex_ball_kernel(2, n, &z, &w).norm()
                / (complex_ball_kernel(2, n, &z, &z).re * complex_ball_kernel(2, n, &w, &w).re).sqrt()
        };
        let values: Vec<f64> = (20..=60).step_by(10).map(cosine).collect();
        for pair in values.windows(2) {
            prop_assert!(pair[1] < pair[0], "{values:?}");
        }
        prop_assert!(values[4] < 0.05, "{values:?}");
    }

    #[test]
    fn tensor_cosine_stays_away_from_zero(z in cvec(2, 2.5), w in cvec(2, 2.5)) {
        // Each coordinate factor tends to sqrt((|u|^2-1)(|v|^2-1)) / |u conj(v) - 1|.
        let mut limit = 1.0;
        for (x, y) in z.iter().zip(&w) {
            let (u, v) = (outer_parameter(*x), outer_parameter(*y));
            prop_assume!(u.norm() > 1.3 && v.norm() > 1.3);
            limit *= ((u.norm_sqr() - 1.0) * (v.norm_sqr() - 1.0)).sqrt() / (u * v.conj() - 1.0).norm();
        }
        for n in (10..=60).step_by(10) {
            let cos = chebyshev_tensor_kernel(n, &z, &w).norm()
                / chebyshev_tensor_kernel(n, &z, &z).re.sqrt()
                / chebyshev_tensor_kernel(n, &w, &w).re.sqrt();
            prop_assert!(cos >= 0.5 * limit && cos <= 1.0 + 1e-12, "n={n} cos={cos} limit={limit}");
        }
    }

    #[test]
    fn graded_square_kernel_sandwich(z in cvec(2, 1.6), n in 1usize..=14) {
        let big_n = (n + 1) * (n + 2) / 2 - 1;
        let k = graded_square_kernel(n, &z);
        let g = GreenFunction::graded_square().eval(&z);
        let growth = (2.0 * n as f64 * g).exp();
        prop_assert!(0.5 * growth <= k * (1.0 + 1e-12), "n={n} K={k} lower={}", 0.5 * growth);
        prop_assert!(k <= (4 * big_n + 1) as f64 * growth * (1.0 + 1e-12), "n={n} K={k}");
    }
}

#[test]
fn graded_square_closed_form_matches_pipeline() {
    let n = 8;
    let q = quadrature::chebyshev_tensor(2, n + 1).unwrap();
    let big_n = (n + 1) * (n + 2) / 2 - 1;
    let basis = orthonormalize(&q.measure, &MonomialOrdering::graded_lex(2), big_n, &GramSchmidtConfig::default()).unwrap();
    let engine = KernelEngine::new(basis);
    for z in [[c(0.3, 0.0), c(-0.7, 0.0)], [c(1.2, 0.4), c(0.1, -0.3)], [c(-0.2, 1.1), c(1.5, 0.0)]] {
        let want = graded_square_kernel(n, &z);
        let got = engine.diagonal(&z);
        assert!((got / want - 1.0).abs() < 1e-9, "{z:?}: {got} vs {want}");
    }
}
