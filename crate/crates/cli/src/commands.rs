//! Command implementations. Each writes its primary artifact to `--out`
//! (or standard output) and notes to standard error.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use christoffel::cdkernel::{hausdorff_distance, GridSlice, GridSpec, KernelEngine, LevelField, ThresholdPolicy};
use christoffel::measures::{cloud_to_csv, load_cloud, save_cloud, CloudFormat, DiscreteMeasure};
use christoffel::orthopoly::{arnoldi_univariate, orthonormalize, OrthoBasis};
use christoffel::perturb::{
    asymptotic_ratio_predictor, closeness as closeness_report, modified_moments, two_measure_bounds, cosine_bound,
    exact_mass_ratio, MassPerturbation, PerturbationReport, Prediction,
};
use christoffel::reference::{ClosedFormKernel, ConformalMap, GreenFunction};
use christoffel::sampling;
use christoffel::verify::{run_checks, OracleConstants};
use christoffel::{Complex64, Error, Result};

use crate::{parse, svg, Method, Outcome, RunConfig, SampleKind};

fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn load(path: &Path) -> Result<DiscreteMeasure> {
    load_cloud(path, CloudFormat::from_path(path))
}

fn pairs(z: &[Complex64]) -> Vec<[f64; 2]> {
    z.iter().map(|c| [c.re, c.im]).collect()
}

fn fit_basis(cfg: &RunConfig, mu: &DiscreteMeasure, method: Method) -> Result<OrthoBasis> {
    let ordering = cfg.ordering(mu.dim())?;
    let basis = match method {
        Method::GramSchmidt => orthonormalize(mu, &ordering, cfg.n, &cfg.gram_schmidt())?,
        Method::Arnoldi => {
            if !ordering.is_monomial_order() {
                return Err(Error::InvalidInput("arnoldi needs the graded-lex ordering".into()));
            }
            arnoldi_univariate(mu, cfg.n)?.0
        }
    };
    if basis.is_exhausted() {
        eprintln!(
            "warning: cloud supports only {} independent polynomials; basis stops at n = {} (requested {})",
            basis.len(),
            basis.n(),
            basis.requested_n()
        );
    }
    Ok(basis)
}

pub fn fit(cfg: &RunConfig, cloud: &Path, method: Method) -> Result<Outcome> {
    let mu = load(cloud)?;
    let basis = fit_basis(cfg, &mu, method)?;
    let mut s = String::new();
    let _ = writeln!(s, "atoms: {}", mu.len());
    let _ = writeln!(s, "dim: {}", mu.dim());
    let _ = writeln!(s, "ordering: {}", basis.ordering());
    let _ = writeln!(s, "requested n: {}", basis.requested_n());
    let _ = writeln!(s, "basis size: {}", basis.len());
    let _ = writeln!(s, "defect: {:e}", basis.defect());
    let idx: Vec<String> = basis.degree_indices().iter().map(|k| k.to_string()).collect();
    let _ = writeln!(s, "degree indices: {}", idx.join(","));
    let _ = writeln!(s, "null records: {}", basis.null_records().len());
    for r in basis.null_records() {
        let _ = writeln!(
            s,
            "null record: monomial index {} exponents {} residual {:e}",
            r.monomial_index, r.monomial, r.residual
        );
    }
    print!("{s}");
    if let Some(path) = &cfg.out {
        let json = serde_json::to_string_pretty(&basis.export())?;
        std::fs::write(path, json + "\n")?;
    }
    Ok(Outcome::Success)
}

/// Per-atom leverage scores with run metadata.
#[derive(Clone, Debug)]
pub struct ScoreTable {
    pub rows: Vec<ScoreRow>,
    pub n: usize,
    pub basis_size: usize,
    pub defect: f64,
    pub ordering: String,
    pub seed: u64,
    pub threshold: f64,
}

#[derive(Clone, Debug)]
pub struct ScoreRow {
    pub index: usize,
    pub coords: Vec<Complex64>,
    pub weight: f64,
    pub score: f64,
    pub flag: bool,
}

impl ScoreTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# n={} basis_size={} defect={:e} ordering={} seed={} threshold={}",
            self.n, self.basis_size, self.defect, self.ordering, self.seed, self.threshold
        );
        let dim = self.rows.first().map(|r| r.coords.len()).unwrap_or(0);
        let mut header = vec!["index".to_string()];
        for k in 1..=dim {
            header.push(format!("re{k}"));
            header.push(format!("im{k}"));
        }
        header.extend(["weight", "score", "flag"].map(String::from));
        let _ = writeln!(s, "{}", header.join(","));
        for r in &self.rows {
            let mut f = vec![r.index.to_string()];
            for c in &r.coords {
                f.push(c.re.to_string());
                f.push(c.im.to_string());
            }
            f.push(r.weight.to_string());
            f.push(r.score.to_string());
            f.push(u8::from(r.flag).to_string());
            let _ = writeln!(s, "{}", f.join(","));
        }
        s
    }
}

pub fn leverage(cfg: &RunConfig, cloud: &Path, threshold: &str, svg_path: Option<&Path>) -> Result<Outcome> {
    let policy = parse::leverage_policy(threshold)?;
    let mu = load(cloud)?;
    let basis = fit_basis(cfg, &mu, Method::GramSchmidt)?;
    let (n, size, defect, ordering) = (basis.n(), basis.len(), basis.defect(), basis.ordering().to_string());
    let report = KernelEngine::new(basis).leverage_scores(policy);
    let mut flags = vec![false; mu.len()];
    for &i in &report.flagged {
        flags[i] = true;
    }
    let table = ScoreTable {
        rows: (0..mu.len())
            .map(|i| ScoreRow {
                index: i,
                coords: mu.atom(i).to_vec(),
                weight: mu.weights()[i],
                score: report.scores[i],
                flag: flags[i],
            })
            .collect(),
        n,
        basis_size: size,
        defect,
        ordering,
        seed: cfg.seed,
        threshold: report.threshold,
    };
    emit(cfg, &table.to_csv())?;
    eprintln!(
        "threshold {} flagged {} of {} atoms; score sum {}",
        report.threshold,
        report.flagged.len(),
        mu.len(),
        report.score_sum
    );
    if let Some(path) = svg_path {
        let pts: Vec<(f64, f64)> = mu.atoms().iter().map(|a| (a[0].re, a[0].im)).collect();
        let title = format!("leverage scores, n = {n}");
        std::fs::write(path, svg::scatter(&pts, &report.scores, &flags, &title))?;
    }
    Ok(Outcome::Success)
}

/// Largest kernel diagonal over atoms the default leverage policy does not flag.
fn auto_level(engine: &KernelEngine, mu: &DiscreteMeasure) -> f64 {
    let report = engine.leverage_scores(ThresholdPolicy::default());
    let k = |i: usize| report.scores[i] / mu.weights()[i];
    let unflagged = (0..mu.len()).filter(|i| !report.flagged.contains(i)).map(k).fold(f64::NEG_INFINITY, f64::max);
    if unflagged.is_finite() {
        unflagged
    } else {
        (0..mu.len()).map(k).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn field_csv(field: &LevelField) -> String {
    let g = field.grid;
    let mut s = format!("# threshold={}\nx,y,value,inside\n", field.threshold);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = j * g.nx + i;
            let _ = writeln!(s, "{},{},{},{}", g.x(i), g.y(j), field.values[k], u8::from(field.mask[k]));
        }
    }
    s
}

pub fn levelset(
    cfg: &RunConfig,
    cloud: &Path,
    grid: &str,
    threshold: &str,
    base: Option<&str>,
    free: usize,
    svg_path: Option<&Path>,
) -> Result<Outcome> {
    let grid = GridSpec::parse(grid)?;
    let fixed = parse::threshold(threshold)?;
    let mu = load(cloud)?;
    let slice = match (mu.dim(), base) {
        (1, None) => GridSlice::plane(grid),
        (_, Some(b)) => GridSlice { grid, base: parse::point(b)?, free },
        (d, None) => return Err(Error::InvalidInput(format!("cloud lives in C^{d}; pass --base with {d} coordinates"))),
    };
    let engine = KernelEngine::new(fit_basis(cfg, &mu, Method::GramSchmidt)?);
    let level = fixed.unwrap_or_else(|| auto_level(&engine, &mu));
    let field = engine.level_field(&slice, level)?;
    emit(cfg, &field_csv(&field))?;
    let inside = field.mask.iter().filter(|&&m| m).count();
    let mut note = format!("threshold {level}; {inside} of {} nodes inside", field.values.len());
    if mu.dim() == 1 {
        let atoms: Vec<Complex64> = mu.atoms().iter().map(|a| a[0]).collect();
        let _ = write!(note, "; hausdorff distance to atoms {}", hausdorff_distance(&field.inside_nodes(), &atoms));
    }
    eprintln!("{note}");
    if let Some(path) = svg_path {
        let atoms: Vec<(f64, f64)> = mu.atoms().iter().map(|a| (a[slice.free].re, a[slice.free].im)).collect();
        let title = format!("K_n(z,z) <= {level:.4e}, n = {}", engine.n());
        std::fs::write(path, svg::level_map(&field, &atoms, &title))?;
    }
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct PerturbPoint {
    z: Vec<[f64; 2]>,
    report: PerturbationReport,
    /// Odd partial sums below the ratio and even ones above.
    bracketed: bool,
    /// Smallest slack of the full monotone chain ordering.
    chain_slack: f64,
    prediction: Option<Prediction>,
}

#[derive(Serialize)]
struct PerturbOutput {
    n: usize,
    basis_size: usize,
    chain_depth: usize,
    masses: Vec<(Vec<[f64; 2]>, f64)>,
    results: Vec<PerturbPoint>,
}

fn ratio_map(name: &str) -> Result<ConformalMap> {
    if name == "disk" {
        return Ok(ConformalMap::disk(Complex64::new(0.0, 0.0), 1.0));
    }
    if let Some(rest) = name.strip_prefix("ellipse:") {
        let axes: Vec<f64> = rest
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidInput(format!("bad ellipse axes '{rest}'")))?;
        return match axes.as_slice() {
            [a, b] if *a > 0.0 && *b >= 0.0 && b <= a => Ok(ConformalMap::ellipse(*a, *b)),
            _ => Err(Error::InvalidInput("ellipse needs a,b with a >= b >= 0, a > 0".into())),
        };
    }
    Err(Error::InvalidInput(format!("unknown ratio function '{name}', expected disk or ellipse:<a>,<b>")))
}

pub fn perturb(
    cfg: &RunConfig,
    cloud: &Path,
    masses: &[String],
    at: &[String],
    chain_depth: usize,
    ratio: Option<&str>,
) -> Result<Outcome> {
    let mu = load(cloud)?;
    let (points, weights): (Vec<_>, Vec<_>) = masses.iter().map(|m| parse::mass(m)).collect::<Result<Vec<_>>>()?.into_iter().unzip();
    parse::same_dim(&points, mu.dim())?;
    let zs: Vec<Vec<Complex64>> = at.iter().map(|s| parse::point(s)).collect::<Result<_>>()?;
    parse::same_dim(&zs, mu.dim())?;
    let pert = MassPerturbation::new(points, weights)?;
    let map = match ratio {
        Some(name) if mu.dim() == 1 => Some(ratio_map(name)?),
        Some(_) => return Err(Error::UnsupportedDimension { expected: 1, found: mu.dim() }),
        None => None,
    };
    let engine = KernelEngine::new(fit_basis(cfg, &mu, Method::GramSchmidt)?);
    let mut results = Vec::with_capacity(zs.len());
    for z in &zs {
        let mut report = exact_mass_ratio(&engine, &pert, z, chain_depth)?;
        let prediction = match &map {
            Some(m) => match asymptotic_ratio_predictor(|p: &[Complex64]| 1.0 / m.phi(p[0]), &pert, z) {
                Ok(p) => Some(p),
                Err(e) => {
                    eprintln!("warning: no predictor at {:?}: {e}", pairs(z));
                    None
                }
            },
            None => None,
        };
        if let Some(Prediction::Ratio(r)) = prediction {
            report.predictor = Some(r);
        }
        let tol = 1e-12 * report.exact_ratio.abs().max(1.0);
        let bracketed = report.sigma_chain.iter().enumerate().all(|(m, &s)| {
            if m % 2 == 1 {
                s <= report.exact_ratio + tol
            } else {
                s >= report.exact_ratio - tol
            }
        });
        let chain_slack = report.chain_slack();
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
        eprintln!(
            "z={:?} ratio={} chain={:?} bracketed={bracketed} chain_slack={chain_slack:e}",
            pairs(z),
            report.exact_ratio,
            report.sigma_chain
        );
        results.push(PerturbPoint { z: pairs(z), report, bracketed, chain_slack, prediction });
    }
    let out = PerturbOutput {
        n: engine.n(),
        basis_size: engine.basis().len(),
        chain_depth,
        masses: pert.points().iter().zip(pert.weights()).map(|(p, &t)| (pairs(p), t)).collect(),
        results,
    };
    emit(cfg, &(serde_json::to_string_pretty(&out)? + "\n"))?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct ClosenessPoint {
    z: Vec<[f64; 2]>,
    k_mu: f64,
    k_nu: f64,
    bounds: Option<(f64, f64)>,
    contained: Option<bool>,
}

#[derive(Serialize)]
struct ClosenessOutput {
    n: usize,
    basis_size: usize,
    epsilon_spectral: f64,
    epsilon_frobenius: f64,
    satisfied: bool,
    cosine_bound: Option<f64>,
    points: Vec<ClosenessPoint>,
}

pub fn closeness(cfg: &RunConfig, mu_path: &Path, nu_path: &Path, at: &[String]) -> Result<Outcome> {
    let mu = load(mu_path)?;
    let nu = load(nu_path)?;
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), found: nu.dim() });
    }
    let zs: Vec<Vec<Complex64>> = at.iter().map(|s| parse::point(s)).collect::<Result<_>>()?;
    parse::same_dim(&zs, mu.dim())?;
    let k_mu = KernelEngine::new(fit_basis(cfg, &mu, Method::GramSchmidt)?);
    let k_nu = KernelEngine::new(fit_basis(cfg, &nu, Method::GramSchmidt)?);
    if k_nu.basis().len() != k_mu.basis().len() {
        return Err(Error::Degenerate(format!(
            "bases have different sizes ({} and {}); the measures are not comparable at this n",
            k_mu.basis().len(),
            k_nu.basis().len()
        )));
    }
    let report = closeness_report(&modified_moments(k_mu.basis(), &nu)?);
    if !report.satisfied {
        eprintln!("warning: epsilon {} >= 1, the two-measure bounds do not apply", report.epsilon_spectral);
    }
    let diag_nu: Vec<f64> = zs.iter().map(|z| k_nu.diagonal(z)).collect();
    let bounds = two_measure_bounds(&report, &diag_nu).ok();
    let points = zs
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let km = k_mu.diagonal(z);
            let b = bounds.as_ref().map(|v| v[i]);
            ClosenessPoint {
                z: pairs(z),
                k_mu: km,
                k_nu: diag_nu[i],
                bounds: b,
                contained: b.map(|(lo, hi)| km >= lo * (1.0 - 1e-12) && km <= hi * (1.0 + 1e-12)),
            }
        })
        .collect();
    let out = ClosenessOutput {
        n: k_mu.n(),
        basis_size: k_mu.basis().len(),
        epsilon_spectral: report.epsilon_spectral,
        epsilon_frobenius: report.epsilon_frobenius,
        satisfied: report.satisfied,
        cosine_bound: cosine_bound(&report).ok(),
        points,
    };
    emit(cfg, &(serde_json::to_string_pretty(&out)? + "\n"))?;
    Ok(Outcome::Success)
}

pub fn green(cfg: &RunConfig, kind: &str, at: &[String]) -> Result<Outcome> {
    let zs: Vec<Vec<Complex64>> = at.iter().map(|s| parse::point(s)).collect::<Result<_>>()?;
    let dim = zs[0].len();
    parse::same_dim(&zs, dim)?;
    let g = GreenFunction::from_name(kind, dim)?;
    let mut s = String::new();
    let mut header: Vec<String> = (1..=dim).flat_map(|k| [format!("re{k}"), format!("im{k}")]).collect();
    header.push("green".into());
    let _ = writeln!(s, "{}", header.join(","));
    for z in &zs {
        let v = g.try_eval(z)?;
        let mut f: Vec<String> = z.iter().flat_map(|c| [c.re.to_string(), c.im.to_string()]).collect();
        f.push(v.to_string());
        let _ = writeln!(s, "{}", f.join(","));
    }
    emit(cfg, &s)?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct OracleOutput<'a> {
    kind: &'a str,
    n: usize,
    z: Vec<[f64; 2]>,
    w: Vec<[f64; 2]>,
    value: [f64; 2],
}

pub fn oracle(cfg: &RunConfig, kind: &str, at: &str, with: Option<&str>) -> Result<Outcome> {
    let z = parse::point(at)?;
    let w = match with {
        Some(s) => parse::point(s)?,
        None => z.clone(),
    };
    let kernel = ClosedFormKernel::from_name(kind, z.len(), cfg.n)?;
    let v = kernel.eval(&z, &w)?;
    let out = OracleOutput { kind, n: cfg.n, z: pairs(&z), w: pairs(&w), value: [v.re, v.im] };
    emit(cfg, &(serde_json::to_string_pretty(&out)? + "\n"))?;
    Ok(Outcome::Success)
}

pub fn verify(cfg: &RunConfig) -> Result<Outcome> {
    let start = Instant::now();
    let table = run_checks(&OracleConstants::default());
    emit(cfg, &table.render())?;
    eprintln!("verify finished in {:.2} s", start.elapsed().as_secs_f64());
    Ok(if table.all_passed() { Outcome::Success } else { Outcome::ChecksFailed })
}

/// Size parameters of the sampling command.
pub struct SampleSize {
    pub count: usize,
    pub outliers: usize,
    pub side: usize,
    pub radial: usize,
    pub angular: usize,
    pub dim: usize,
}

pub fn sample(cfg: &RunConfig, kind: SampleKind, size: SampleSize) -> Result<Outcome> {
    let positive = |v: usize, name: &str| {
        if v == 0 {
            Err(Error::InvalidInput(format!("--{name} must be positive")))
        } else {
            Ok(())
        }
    };
    let (measure, planted) = match kind {
        SampleKind::DiskOutliers => {
            positive(size.count, "count")?;
            let p = sampling::disk_with_outliers(size.count, size.outliers, cfg.seed);
            (p.measure, Some(p.outliers))
        }
        SampleKind::SquareOutliers => {
            positive(size.side, "side")?;
            let p = sampling::square_grid_with_outliers(size.side, size.outliers, cfg.seed);
            (p.measure, Some(p.outliers))
        }
        SampleKind::Cusp => {
            positive(size.radial, "radial")?;
            positive(size.angular, "angular")?;
            (sampling::cusp_curve(size.radial, size.angular), None)
        }
        SampleKind::Roots => {
            positive(size.count, "count")?;
            (sampling::roots_of_unity(size.count), None)
        }
        SampleKind::Random => {
            positive(size.count, "count")?;
            positive(size.dim, "dim")?;
            (sampling::random_cloud(size.dim, size.count, &mut sampling::rng(cfg.seed)), None)
        }
    };
    let planted_note = planted.as_ref().filter(|p| !p.is_empty()).map(|p| {
        let idx: Vec<String> = p.iter().map(|i| i.to_string()).collect();
        format!("planted outliers: {}", idx.join(","))
    });
    match &cfg.out {
        Some(path) => {
            save_cloud(&measure, path, CloudFormat::from_path(path))?;
            println!("wrote {} atoms to {}", measure.len(), path.display());
            if let Some(note) = planted_note {
                println!("{note}");
            }
        }
        None => {
            if let Some(note) = planted_note {
                println!("# {note}");
            }
            print!("{}", cloud_to_csv(&measure));
        }
    }
    Ok(Outcome::Success)
}
