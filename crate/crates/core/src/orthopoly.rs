//! Orthonormal polynomials of a discrete measure.
//!
//! Bases are built in the normalized coordinates of [`normalize_cloud`]
//! (`u = B z + b`, unit mass) by a Gram-Schmidt sweep over the monomial
//! enumeration. For graded orderings the candidate for monomial `z^alpha` is
//! `u_v * q_parent(u)`, where `q_parent` is the already computed polynomial
//! whose leading monomial is `alpha - e_v`; in one variable this is exactly the
//! Arnoldi process. Each new polynomial is stored as a recurrence step, which
//! is how [`OrthoBasis::evaluate`] evaluates it away from the cloud.
//!
//! [`normalize_cloud`]: crate::measures::normalize_cloud

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::measures::{
    enumerate_monomials, normalization_of, AffineMap, DiscreteMeasure, MonomialOrdering,
    MonomialTable, MultiIndex,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Gram matrix of the first `k + 1` monomials.
#[derive(Clone, Debug)]
pub struct MomentMatrix {
    /// Entry `(j, l)` is `sum_i t_i z_i^{alpha(l)} conj(z_i^{alpha(j)})`.
    pub entries: CMatrix,
    pub monomials: Vec<MultiIndex>,
}

impl MomentMatrix {
    pub fn k(&self) -> usize {
        self.monomials.len() - 1
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigen(&self.entries).0
    }

    /// Number of eigenvalues above `rel_tol * largest`.
    pub fn numerical_rank(&self, rel_tol: f64) -> usize {
        let values = self.eigenvalues();
        let max = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        values.iter().filter(|&&v| v > rel_tol * max).count()
    }
}

pub fn build_moment_matrix(
    measure: &DiscreteMeasure,
    ordering: &MonomialOrdering,
    k: usize,
) -> Result<MomentMatrix> {
    check_dim(measure.dim(), ordering.dim())?;
    let monomials = enumerate_monomials(ordering, k + 1)?;
    let m = monomials.len();
    let mut entries = CMatrix::zeros(m, m);
    let mut values = vec![ZERO; m];
    for (z, &t) in measure.atoms().iter().zip(measure.weights()) {
        for (v, a) in values.iter_mut().zip(&monomials) {
            *v = a.eval(z);
        }
        for j in 0..m {
            let cj = values[j].conj() * t;
            for l in 0..m {
                entries[(j, l)] += values[l] * cj;
            }
        }
    }
    Ok(MomentMatrix { entries, monomials })
}

/// Coefficients of the orthonormal polynomials from a Cholesky factorization
/// of a full-rank moment matrix: columns of `R^{-1}` where `M = R^* R`.
///
/// Squares the condition number of the problem; intended as a reference
/// route for small, well conditioned cases only.
pub fn cholesky_coefficients(moments: &MomentMatrix) -> Result<CMatrix> {
    let chol = linalg::hermitian_part(&moments.entries)
        .cholesky()
        .ok_or_else(|| Error::Singular("moment matrix is not positive definite".into()))?;
    // M = L L^*, so R = L^* and R^{-1} = (L^*)^{-1}.
    let l_adj = chol.l().adjoint();
    let n = l_adj.nrows();
    l_adj
        .solve_upper_triangular(&CMatrix::identity(n, n))
        .ok_or_else(|| Error::Singular("triangular factor is singular".into()))
}

/// How Gram-Schmidt candidates are formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CandidateRule {
    /// `u_v * q_parent`; requires a graded (monomial) ordering.
    Shifted,
    /// The monomial `u^alpha` itself.
    Monomial,
}

#[derive(Clone, Debug)]
pub struct GramSchmidtConfig {
    /// A candidate whose residual is at most `rank_tol` times its own norm is a null-record.
    pub rank_tol: f64,
    /// Orthogonalization passes per candidate.
    pub passes: usize,
    /// `None` picks `Shifted` for graded orderings and `Monomial` otherwise.
    pub rule: Option<CandidateRule>,
    /// Scan at most `scan_factor * (n_target + 1)` monomials.
    pub scan_factor: usize,
}

impl Default for GramSchmidtConfig {
    fn default() -> Self {
        GramSchmidtConfig { rank_tol: 1e-8, passes: 2, rule: None, scan_factor: 4 }
    }
}

impl GramSchmidtConfig {
    pub fn with_rank_tol(mut self, rank_tol: f64) -> Self {
        self.rank_tol = rank_tol;
        self
    }

    pub fn with_passes(mut self, passes: usize) -> Self {
        self.passes = passes;
        self
    }

    pub fn with_rule(mut self, rule: CandidateRule) -> Self {
        self.rule = Some(rule);
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Source {
    Shift { parent: usize, var: usize },
    Monomial(usize),
}

/// `q_j = (candidate - sum_i proj_i q_i) / norm` in normalized coordinates.
#[derive(Clone, Debug)]
struct Step {
    source: Source,
    proj: Vec<Complex64>,
    norm: f64,
}

/// A detected element of the null space: a polynomial with leading monomial
/// `monomial` (coefficient 1) that vanishes on the cloud up to `residual`.
#[derive(Clone, Debug, Serialize)]
pub struct NullRecord {
    pub monomial_index: usize,
    pub monomial: MultiIndex,
    /// Coefficients on monomials `0..=monomial_index` in original coordinates.
    pub coefficients: Vec<Complex64>,
    /// `||r||_{2,mu} / ||candidate||_{2,mu}` measured in normalized coordinates.
    pub residual: f64,
}

/// Orthonormal family `p_0, ..., p_n` of a discrete measure.
#[derive(Clone, Debug)]
pub struct OrthoBasis {
    ordering: MonomialOrdering,
    map: AffineMap,
    table: MonomialTable,
    steps: Vec<Step>,
    degree_indices: Vec<usize>,
    /// Normalized-coordinate coefficient columns over `table`.
    norm_coefficients: Vec<Vec<Complex64>>,
    null_records: Vec<NullRecord>,
    sample_values: CMatrix,
    measure: DiscreteMeasure,
    defect: f64,
    requested: usize,
    exhausted: bool,
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

struct Builder<'a> {
    measure: &'a DiscreteMeasure,
    map: AffineMap,
    /// Normalized atoms.
    u: Vec<Vec<Complex64>>,
    sqrt_w: Vec<f64>,
    table: MonomialTable,
    /// Orthonormal columns `sqrt(w_i) q_j(u_i)`.
    q: Vec<Vec<Complex64>>,
    steps: Vec<Step>,
    degree_indices: Vec<usize>,
    coeffs: Vec<Vec<Complex64>>,
    /// pivot index for each scanned monomial, `None` for null monomials.
    pivot_of: Vec<Option<usize>>,
    /// normalized coefficients and weighted residual vectors of null monomials.
    null_norm: Vec<Option<(Vec<Complex64>, Vec<Complex64>, f64)>>,
    null_order: Vec<usize>,
}

impl<'a> Builder<'a> {
    fn new(measure: &'a DiscreteMeasure, ordering: &MonomialOrdering, scan: usize) -> Result<Self> {
        let (map, normalized) = normalization_of(measure);
        let table = MonomialTable::new(ordering, scan)?;
        let u = normalized.atoms().to_vec();
        let sqrt_w = normalized.weights().iter().map(|w| w.sqrt()).collect();
        Ok(Builder {
            measure,
            map,
            u,
            sqrt_w,
            pivot_of: vec![None; table.len()],
            null_norm: vec![None; table.len()],
            table,
            q: Vec::new(),
            steps: Vec::new(),
            degree_indices: Vec::new(),
            coeffs: Vec::new(),
            null_order: Vec::new(),
        })
    }

    fn shift_coefficients(&self, coef: &[Complex64], var: usize) -> Result<Vec<Complex64>> {
        let mut out = vec![ZERO; self.table.len()];
        for (i, c) in coef.iter().enumerate() {
            if *c == ZERO {
                continue;
            }
            let raised = self.table.list[i].raised(var);
            let pos = self.table.position(&raised).ok_or_else(|| {
                Error::InvalidInput(
                    "shifted candidates need an ordering closed under multiplication".into(),
                )
            })?;
            out[pos] = *c;
        }
        Ok(out)
    }

    /// Orthogonalizes `cand` against all columns, returning accumulated projections.
    fn orthogonalize(&self, cand: &mut [Complex64], passes: usize) -> Vec<Complex64> {
        let mut total = vec![ZERO; self.q.len()];
        for _ in 0..passes {
            let h: Vec<Complex64> = self.q.iter().map(|qj| linalg::dot_conj(cand, qj)).collect();
            for (qj, hj) in self.q.iter().zip(&h) {
                for (c, x) in cand.iter_mut().zip(qj) {
                    *c -= hj * x;
                }
            }
            for (t, hj) in total.iter_mut().zip(&h) {
                *t += hj;
            }
        }
        total
    }

    fn candidate(&self, k: usize, rule: CandidateRule) -> Result<Option<(Source, Vec<Complex64>, Vec<Complex64>)>> {
        let alpha = &self.table.list[k];
        match rule {
            CandidateRule::Monomial => {
                let vals = self
                    .u
                    .iter()
                    .zip(&self.sqrt_w)
                    .map(|(u, s)| alpha.eval(u) * s)
                    .collect();
                let mut coef = vec![ZERO; self.table.len()];
                coef[k] = ONE;
                Ok(Some((Source::Monomial(k), vals, coef)))
            }
            CandidateRule::Shifted => {
                for var in 0..alpha.dim() {
                    let Some(parent_alpha) = alpha.lowered(var) else { continue };
                    let parent_pos = self.table.position(&parent_alpha).expect("downward closed");
                    if let Some(parent) = self.pivot_of[parent_pos] {
                        let vals = self.q[parent]
                            .iter()
                            .zip(&self.u)
                            .map(|(x, u)| x * u[var])
                            .collect();
                        let coef = self.shift_coefficients(&self.coeffs[parent], var)?;
                        return Ok(Some((Source::Shift { parent, var }, vals, coef)));
                    }
                }
                Ok(None)
            }
        }
    }

    fn run(&mut self, n_target: usize, config: &GramSchmidtConfig, rule: CandidateRule) -> Result<()> {
        for k in 0..self.table.len() {
            if self.steps.len() == n_target + 1 {
                break;
            }
            if k == 0 {
                let vals: Vec<Complex64> = self.sqrt_w.iter().map(|&s| Complex64::new(s, 0.0)).collect();
                let norm = linalg::norm(&vals);
                let mut coef = vec![ZERO; self.table.len()];
                coef[0] = Complex64::new(1.0 / norm, 0.0);
                self.push_pivot(0, Source::Monomial(0), Vec::new(), norm, vals, coef);
                continue;
            }
            match self.candidate(k, rule)? {
                Some((source, mut vals, mut coef)) => {
                    let cand_norm = linalg::norm(&vals);
                    let proj = self.orthogonalize(&mut vals, config.passes);
                    for (qc, h) in self.coeffs.iter().zip(&proj) {
                        for (c, x) in coef.iter_mut().zip(qc) {
                            *c -= h * x;
                        }
                    }
                    let resid = linalg::norm(&vals);
                    if cand_norm > 0.0 && resid > config.rank_tol * cand_norm {
                        self.push_pivot(k, source, proj, resid, vals, coef);
                    } else {
                        let lead = coef[k];
                        let rel = if cand_norm > 0.0 { resid / cand_norm } else { 0.0 };
                        let coef = coef.iter().map(|c| c / lead).collect();
                        let vals = vals.iter().map(|c| c / lead).collect();
                        self.null_norm[k] = Some((coef, vals, rel));
                        self.null_order.push(k);
                    }
                }
                None => {
                    // Every parent is itself null: z^alpha = u_v * (null polynomial) + lower terms.
                    let alpha = self.table.list[k].clone();
                    let var = (0..alpha.dim()).find(|&v| alpha.0[v] > 0).expect("k > 0");
                    let parent = self.table.position(&alpha.lowered(var).unwrap()).unwrap();
                    let (pc, pv, _) = self.null_norm[parent].clone().expect("parent is null");
                    let coef = self.shift_coefficients(&pc, var)?;
                    let vals: Vec<Complex64> = pv.iter().zip(&self.u).map(|(x, u)| x * u[var]).collect();
                    let denom: f64 = self
                        .u
                        .iter()
                        .zip(&self.sqrt_w)
                        .map(|(u, s)| (alpha.eval(u) * s).norm_sqr())
                        .sum::<f64>()
                        .sqrt();
                    let rel = if denom > 0.0 { linalg::norm(&vals) / denom } else { 0.0 };
                    self.null_norm[k] = Some((coef, vals, rel));
                    self.null_order.push(k);
                }
            }
        }
        Ok(())
    }

    fn push_pivot(
        &mut self,
        k: usize,
        source: Source,
        proj: Vec<Complex64>,
        norm: f64,
        mut vals: Vec<Complex64>,
        mut coef: Vec<Complex64>,
    ) {
        let inv = 1.0 / norm;
        vals.iter_mut().for_each(|v| *v *= inv);
        coef.iter_mut().for_each(|c| *c *= inv);
        self.pivot_of[k] = Some(self.q.len());
        self.q.push(vals);
        self.coeffs.push(coef);
        self.steps.push(Step { source, proj, norm });
        self.degree_indices.push(k);
    }

    fn finish(self, ordering: &MonomialOrdering, n_target: usize) -> OrthoBasis {
        let count = self.q.len();
        let n_atoms = self.u.len();
        let weights = self.measure.weights();
        let mut sample_values = CMatrix::zeros(n_atoms, count);
        for (j, col) in self.q.iter().enumerate() {
            for i in 0..n_atoms {
                sample_values[(i, j)] = col[i] / weights[i].sqrt();
            }
        }
        let defect = gram_defect(&self.q);
        let null_records = self
            .null_order
            .iter()
            .map(|&k| {
                let (coef, _, residual) = self.null_norm[k].as_ref().unwrap();
                let mut orig = to_original(&self.table, &self.map, coef, k + 1);
                let lead = orig[k];
                orig.iter_mut().for_each(|c| *c /= lead);
                NullRecord {
                    monomial_index: k,
                    monomial: self.table.list[k].clone(),
                    coefficients: orig,
                    residual: *residual,
                }
            })
            .collect();
        OrthoBasis {
            ordering: ordering.clone(),
            exhausted: count < n_target + 1,
            map: self.map,
            table: self.table,
            steps: self.steps,
            degree_indices: self.degree_indices,
            norm_coefficients: self.coeffs,
            null_records,
            sample_values,
            measure: self.measure.clone(),
            defect,
            requested: n_target,
        }
    }
}

/// `|| Q^* Q - I ||_2` for orthonormal-by-construction columns.
fn gram_defect(q: &[Vec<Complex64>]) -> f64 {
    let m = q.len();
    let mut g = CMatrix::zeros(m, m);
    for j in 0..m {
        for l in j..m {
            let v = linalg::dot_conj(&q[l], &q[j]);
            g[(j, l)] = v;
            g[(l, j)] = v.conj();
        }
        g[(j, j)] -= ONE;
    }
    linalg::hermitian_spectral_norm(&g)
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Converts coefficients in `u = B z + b` to coefficients in `z`, including
/// the mass factor `sqrt(c)`, over the first `len` monomials of `table`.
fn to_original(table: &MonomialTable, map: &AffineMap, coef: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; len];
    let dim = map.dim();
    for (k, ck) in coef.iter().enumerate().take(len) {
        if *ck == ZERO {
            continue;
        }
        let beta = &table.list[k];
        // Iterate over gamma <= beta componentwise.
        let mut gamma = vec![0u32; dim];
        loop {
            let mut term = *ck;
            for v in 0..dim {
                let (b, g) = (beta.0[v], gamma[v]);
                term *= binomial(b, g) * map.scale[v].powu(g) * map.shift[v].powu(b - g);
            }
            if let Some(pos) = table.position(&MultiIndex(gamma.clone())) {
                if pos < len {
                    out[pos] += term;
                }
            }
            let mut v = 0;
            while v < dim {
                if gamma[v] < beta.0[v] {
                    gamma[v] += 1;
                    break;
                }
                gamma[v] = 0;
                v += 1;
            }
            if v == dim {
                break;
            }
        }
    }
    let factor = map.mass_scale.sqrt();
    out.iter_mut().for_each(|c| *c *= factor);
    out
}

/// Rank-aware Gram-Schmidt construction of `p_0, ..., p_{n_target}`.
///
/// Monomials whose candidate residual falls below `rank_tol` are recorded as
/// null-records and skipped. If the scan limit is reached first, the basis is
/// shorter than requested and [`OrthoBasis::is_exhausted`] is set.
pub fn orthonormalize(
    measure: &DiscreteMeasure,
    ordering: &MonomialOrdering,
    n_target: usize,
    config: &GramSchmidtConfig,
) -> Result<OrthoBasis> {
    check_dim(measure.dim(), ordering.dim())?;
    if n_target + 1 > measure.len() {
        return Err(Error::InvalidInput(format!(
            "n = {n_target} needs at least {} atoms, measure has {}",
            n_target + 1,
            measure.len()
        )));
    }
    if config.passes == 0 {
        return Err(Error::InvalidInput("at least one orthogonalization pass is required".into()));
    }
    let rule = config.rule.unwrap_or(if ordering.is_monomial_order() {
        CandidateRule::Shifted
    } else {
        CandidateRule::Monomial
    });
    let mut scan = config.scan_factor.max(1) * (n_target + 1);
    if let Some(cap) = ordering.capacity() {
        scan = scan.min(cap);
    }
    let mut builder = Builder::new(measure, ordering, scan)?;
    builder.run(n_target, config, rule)?;
    Ok(builder.finish(ordering, n_target))
}

/// Upper Hessenberg matrix `H` with `z v_n(z) = v_{n+1}(z) H` on the support (`d = 1`).
#[derive(Clone, Debug)]
pub struct HessenbergOperator {
    /// `(n + 2) x (n + 1)` in original coordinates.
    pub matrix: CMatrix,
    /// `p_{n+1}` on the atoms, absent when the support has only `n + 1` points.
    pub next_values: Option<Vec<Complex64>>,
}

impl HessenbergOperator {
    /// Largest relative violation of `z p_j(z_i) = sum_k p_k(z_i) H[k, j]` over atoms.
    pub fn shift_residual(&self, basis: &OrthoBasis) -> f64 {
        let v = basis.sample_values();
        let atoms = basis.measure().atoms();
        let cols = self.matrix.ncols();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for (i, z) in atoms.iter().enumerate() {
            for j in 0..cols {
                let lhs = z[0] * v[(i, j)];
                let mut rhs = ZERO;
                for k in 0..=(j + 1).min(cols - 1) {
                    rhs += v[(i, k)] * self.matrix[(k, j)];
                }
                if j + 1 == cols {
                    if let Some(next) = &self.next_values {
                        rhs += next[i] * self.matrix[(cols, j)];
                    }
                }
                worst = worst.max((lhs - rhs).norm());
                scale = scale.max(lhs.norm());
            }
        }
        worst / scale.max(f64::MIN_POSITIVE)
    }

    pub fn subdiagonal(&self) -> Vec<Complex64> {
        (0..self.matrix.ncols()).map(|j| self.matrix[(j + 1, j)]).collect()
    }
}

/// Full Arnoldi process for `d = 1`: `p_{j+1}` from `z p_j` by two passes of
/// modified Gram-Schmidt, returning the basis and its Hessenberg matrix.
pub fn arnoldi_univariate(measure: &DiscreteMeasure, n: usize) -> Result<(OrthoBasis, HessenbergOperator)> {
    if measure.dim() != 1 {
        return Err(Error::UnsupportedDimension { expected: 1, found: measure.dim() });
    }
    if n + 1 > measure.len() {
        return Err(Error::InvalidInput(format!(
            "n = {n} needs at least {} atoms, measure has {}",
            n + 1,
            measure.len()
        )));
    }
    let ordering = MonomialOrdering::graded_lex(1);
    let mut b = Builder::new(measure, &ordering, n + 2)?;
    let big_n = b.u.len();
    let x: Vec<Complex64> = b.u.iter().map(|u| u[0]).collect();
    let mut h = CMatrix::zeros(n + 2, n + 1);
    let mut next = None;

    let first: Vec<Complex64> = b.sqrt_w.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    let norm0 = linalg::norm(&first);
    let mut coef0 = vec![ZERO; b.table.len()];
    coef0[0] = Complex64::new(1.0 / norm0, 0.0);
    b.push_pivot(0, Source::Monomial(0), Vec::new(), norm0, first, coef0);

    for j in 0..=n {
        let mut w: Vec<Complex64> = b.q[j].iter().zip(&x).map(|(q, x)| q * x).collect();
        let mut proj = vec![ZERO; j + 1];
        for _ in 0..2 {
            for (i, qi) in b.q.iter().enumerate() {
                let hij = linalg::dot_conj(&w, qi);
                for (wk, qk) in w.iter_mut().zip(qi) {
                    *wk -= hij * qk;
                }
                proj[i] += hij;
            }
        }
        let beta = linalg::norm(&w);
        for (i, p) in proj.iter().enumerate() {
            h[(i, j)] = *p;
        }
        h[(j + 1, j)] = Complex64::new(beta, 0.0);
        if j == n {
            if n + 1 < big_n && beta > 0.0 {
                let vals: Vec<Complex64> = w
                    .iter()
                    .zip(measure.weights())
                    .map(|(x, t)| x / (beta * t.sqrt()))
                    .collect();
                next = Some(vals);
            }
            break;
        }
        let coef = b.shift_coefficients(&b.coeffs[j], 0)?;
        let mut coef = coef;
        for (qc, hh) in b.coeffs.iter().zip(&proj) {
            for (c, xx) in coef.iter_mut().zip(qc) {
                *c -= hh * xx;
            }
        }
        b.push_pivot(j + 1, Source::Shift { parent: j, var: 0 }, proj, beta, w, coef);
    }

    // Back to original coordinates: z = (u - b) / B.
    let scale = b.map.scale[0];
    let shift = b.map.shift[0];
    let mut hz = h.clone();
    for j in 0..=n {
        hz[(j, j)] -= shift;
    }
    hz /= scale;
    let basis = b.finish(&ordering, n);
    Ok((basis, HessenbergOperator { matrix: hz, next_values: next }))
}

/// Serializable view of a basis.
#[derive(Clone, Debug, Serialize)]
pub struct BasisExport {
    pub dim: usize,
    pub ordering: String,
    pub n: usize,
    pub degree_indices: Vec<usize>,
    pub monomials: Vec<MultiIndex>,
    /// `coefficients[j][k] = [re, im]` of monomial `k` in `p_j`.
    pub coefficients: Vec<Vec<[f64; 2]>>,
    pub null_records: Vec<NullRecordExport>,
    pub defect: f64,
    pub exhausted: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct NullRecordExport {
    pub monomial_index: usize,
    pub monomial: MultiIndex,
    pub coefficients: Vec<[f64; 2]>,
    pub residual: f64,
}

impl OrthoBasis {
    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    pub fn ordering(&self) -> &MonomialOrdering {
        &self.ordering
    }

    /// Index `n` of the last polynomial (`len() - 1`).
    pub fn n(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `n` that was asked for.
    pub fn requested_n(&self) -> usize {
        self.requested
    }

    /// True when the monomial scan ended before `requested_n() + 1` polynomials were found.
    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    /// Positions `k_0 < k_1 < ... < k_n` of the leading monomials.
    pub fn degree_indices(&self) -> &[usize] {
        &self.degree_indices
    }

    /// Scanned monomials, in enumeration order.
    pub fn monomials(&self) -> &[MultiIndex] {
        &self.table.list
    }

    pub fn null_records(&self) -> &[NullRecord] {
        &self.null_records
    }

    /// `N x (n+1)` matrix of `p_j(z_i)` on the atoms.
    pub fn sample_values(&self) -> &CMatrix {
        &self.sample_values
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        &self.measure
    }

    pub fn map(&self) -> &AffineMap {
        &self.map
    }

    /// `||V^* diag(t) V - I||_2` at construction time.
    pub fn defect(&self) -> f64 {
        self.defect
    }

    /// Echelon coefficient matrix in original coordinates: column `j` holds
    /// the coefficients of `p_j` on monomials `0..=k_n`.
    pub fn coefficients(&self) -> CMatrix {
        let rows = self.degree_indices.last().map(|k| k + 1).unwrap_or(0);
        let mut m = CMatrix::zeros(rows, self.len());
        for (j, col) in self.norm_coefficients.iter().enumerate() {
            let orig = to_original(&self.table, &self.map, col, rows);
            for (k, c) in orig.into_iter().enumerate() {
                m[(k, j)] = c;
            }
        }
        m
    }

    /// `v_n(z) = (p_0(z), ..., p_n(z))` via the stored recurrence.
    pub fn evaluate(&self, z: &[Complex64]) -> Vec<Complex64> {
        let mut u = vec![ZERO; self.dim()];
        self.map.apply_into(z, &mut u);
        let mut vals: Vec<Complex64> = Vec::with_capacity(self.len());
        for step in &self.steps {
            let mut c = match &step.source {
                Source::Shift { parent, var } => u[*var] * vals[*parent],
                Source::Monomial(k) => self.table.list[*k].eval(&u),
            };
            for (h, v) in step.proj.iter().zip(&vals) {
                c -= h * v;
            }
            vals.push(c / step.norm);
        }
        let factor = self.map.mass_scale.sqrt();
        vals.iter_mut().for_each(|v| *v *= factor);
        vals
    }

    /// `v_n(z)` by accumulating monomials in enumeration order and applying
    /// the echelon coefficients (normalized coordinates).
    pub fn evaluate_monomial_expansion(&self, z: &[Complex64]) -> Vec<Complex64> {
        let u = self.map.apply(z);
        let rows = self.degree_indices.last().map(|k| k + 1).unwrap_or(0);
        let mut mono = vec![ZERO; rows];
        for k in 0..rows {
            let alpha = &self.table.list[k];
            mono[k] = match (0..alpha.dim()).find(|&v| alpha.0[v] > 0) {
                None => ONE,
                Some(v) => {
                    let parent = self.table.position(&alpha.lowered(v).unwrap()).unwrap();
                    mono[parent] * u[v]
                }
            };
        }
        let factor = self.map.mass_scale.sqrt();
        self.norm_coefficients
            .iter()
            .map(|col| col.iter().zip(&mono).map(|(c, m)| c * m).sum::<Complex64>() * factor)
            .collect()
    }

    /// First `m + 1` polynomials.
    pub fn truncated(&self, m: usize) -> Result<OrthoBasis> {
        if m >= self.len() {
            return Err(Error::InvalidInput(format!("basis has only {} polynomials", self.len())));
        }
        let mut out = self.clone();
        out.steps.truncate(m + 1);
        out.degree_indices.truncate(m + 1);
        out.norm_coefficients.truncate(m + 1);
        out.sample_values = self.sample_values.columns(0, m + 1).into_owned();
        let k_last = out.degree_indices[m];
        out.null_records.retain(|r| r.monomial_index < k_last);
        out.requested = m;
        out.exhausted = false;
        let t = self.measure.weights();
        let cols: Vec<Vec<Complex64>> = (0..=m)
            .map(|j| (0..t.len()).map(|i| out.sample_values[(i, j)] * t[i].sqrt()).collect())
            .collect();
        out.defect = gram_defect(&cols);
        Ok(out)
    }

    pub fn export(&self) -> BasisExport {
        let coef = self.coefficients();
        let pair = |c: &Complex64| [c.re, c.im];
        BasisExport {
            dim: self.dim(),
            ordering: self.ordering.to_string(),
            n: self.n(),
            degree_indices: self.degree_indices.clone(),
            monomials: self.table.list[..coef.nrows()].to_vec(),
            coefficients: (0..coef.ncols())
                .map(|j| coef.column(j).iter().map(pair).collect())
                .collect(),
            null_records: self
                .null_records
                .iter()
                .map(|r| NullRecordExport {
                    monomial_index: r.monomial_index,
                    monomial: r.monomial.clone(),
                    coefficients: r.coefficients.iter().map(pair).collect(),
                    residual: r.residual,
                })
                .collect(),
            defect: self.defect,
            exhausted: self.exhausted,
        }
    }
}

/// `v_n(z)` for a basis.
pub fn evaluate_basis(basis: &OrthoBasis, z: &[Complex64]) -> Vec<Complex64> {
    basis.evaluate(z)
}

/// `|| V^* diag(t) V - I ||_2` with `V` the basis evaluated on `measure`.
pub fn orthogonality_defect(basis: &OrthoBasis, measure: &DiscreteMeasure) -> f64 {
    let cols: Vec<Vec<Complex64>> = {
        let rows: Vec<Vec<Complex64>> = measure.atoms().iter().map(|z| basis.evaluate(z)).collect();
        (0..basis.len())
            .map(|j| {
                rows.iter()
                    .zip(measure.weights())
                    .map(|(r, t)| r[j] * t.sqrt())
                    .collect()
            })
            .collect()
    };
    gram_defect(&cols)
}
