//! Point clouds, monomial orderings and affine normalization.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent vector of a monomial `z^alpha = z_1^{alpha_1} ... z_d^{alpha_d}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|alpha|`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// `alpha + e_var`.
    pub fn raised(&self, var: usize) -> Self {
        let mut e = self.0.clone();
        e[var] += 1;
        MultiIndex(e)
    }

    /// `alpha - e_var`, or `None` when the exponent of `var` is zero.
    pub fn lowered(&self, var: usize) -> Option<Self> {
        if self.0[var] == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[var] -= 1;
        Some(MultiIndex(e))
    }

    /// Evaluates `z^alpha`.
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.0
            .iter()
            .zip(z)
            .fold(Complex64::new(1.0, 0.0), |acc, (&e, &x)| acc * x.powu(e))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Enumeration `alpha(0), alpha(1), ...` of multi-indices.
///
/// Both kinds list monomials by increasing total degree and, within a degree,
/// by decreasing exponent of `z_1`, then `z_2`, and so on: for `d = 2` this
/// gives `1, z1, z2, z1^2, z1 z2, z2^2, z1^3, ...`. The tensor kind keeps only
/// the box `{0..=max_degree}^d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MonomialOrdering {
    GradedLex { dim: usize },
    Tensor { dim: usize, max_degree: u32 },
}

impl MonomialOrdering {
    pub fn graded_lex(dim: usize) -> Self {
        MonomialOrdering::GradedLex { dim }
    }

    pub fn tensor(dim: usize, max_degree: u32) -> Self {
        MonomialOrdering::Tensor { dim, max_degree }
    }

    /// Parses `graded-lex` or `tensor:<n>`.
    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        let text = text.trim();
        if text == "graded-lex" || text == "grlex" {
            return Ok(Self::graded_lex(dim));
        }
        if let Some(n) = text.strip_prefix("tensor:") {
            let max_degree = n
                .parse::<u32>()
                .map_err(|_| Error::InvalidInput(format!("bad tensor degree '{n}'")))?;
            return Ok(Self::tensor(dim, max_degree));
        }
        Err(Error::InvalidInput(format!(
            "unknown ordering '{text}', expected graded-lex or tensor:<n>"
        )))
    }

    pub fn dim(&self) -> usize {
        match self {
            MonomialOrdering::GradedLex { dim } | MonomialOrdering::Tensor { dim, .. } => *dim,
        }
    }

    /// Number of monomials in the enumeration, `None` when unbounded.
    pub fn capacity(&self) -> Option<usize> {
        match self {
            MonomialOrdering::GradedLex { .. } => None,
            MonomialOrdering::Tensor { dim, max_degree } => {
                Some((*max_degree as usize + 1).saturating_pow(*dim as u32))
            }
        }
    }

    /// True when the enumeration is closed under multiplication in the sense
    /// that `z_v * z^beta` precedes `z_v * z^gamma` whenever `beta` precedes
    /// `gamma` (a monomial order). The tensor box is not.
    pub fn is_monomial_order(&self) -> bool {
        matches!(self, MonomialOrdering::GradedLex { .. })
    }

    fn label(&self) -> String {
        match self {
            MonomialOrdering::GradedLex { .. } => "graded-lex".into(),
            MonomialOrdering::Tensor { max_degree, .. } => format!("tensor:{max_degree}"),
        }
    }
}

impl fmt::Display for MonomialOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Appends all exponent vectors of total degree `degree` in `dim` variables,
/// largest leading exponent first.
fn push_degree(dim: usize, degree: u32, out: &mut Vec<MultiIndex>) {
    fn rec(prefix: &mut Vec<u32>, remaining: u32, slots: usize, out: &mut Vec<MultiIndex>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for e in (0..=remaining).rev() {
            prefix.push(e);
            rec(prefix, remaining - e, slots - 1, out);
            prefix.pop();
        }
    }
    rec(&mut Vec::with_capacity(dim), degree, dim, out);
}

/// First `count` monomials of `ordering`.
pub fn enumerate_monomials(ordering: &MonomialOrdering, count: usize) -> Result<Vec<MultiIndex>> {
    if count == 0 {
        return Err(Error::InvalidInput("count must be at least 1".into()));
    }
    let dim = ordering.dim();
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    if let Some(capacity) = ordering.capacity() {
        if count > capacity {
            return Err(Error::Capacity { requested: count, capacity });
        }
    }
    let mut out = Vec::with_capacity(count);
    let mut degree = 0u32;
    while out.len() < count {
        let mut layer = Vec::new();
        push_degree(dim, degree, &mut layer);
        if let MonomialOrdering::Tensor { max_degree, .. } = ordering {
            layer.retain(|a| a.0.iter().all(|&e| e <= *max_degree));
        }
        for a in layer {
            if out.len() == count {
                break;
            }
            out.push(a);
        }
        degree += 1;
    }
    Ok(out)
}

/// Enumerated monomials with reverse lookup.
#[derive(Clone, Debug)]
pub struct MonomialTable {
    pub list: Vec<MultiIndex>,
    index: HashMap<MultiIndex, usize>,
}

impl MonomialTable {
    pub fn new(ordering: &MonomialOrdering, count: usize) -> Result<Self> {
        let list = enumerate_monomials(ordering, count)?;
        let index = list.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        Ok(MonomialTable { list, index })
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.index.get(alpha).copied()
    }
}

/// Weighted point cloud `sum_i t_i delta_{z_i}` in `C^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: Vec<Vec<Complex64>>,
    weights: Vec<f64>,
}

fn atom_key(z: &[Complex64]) -> Vec<u64> {
    // +0.0 and -0.0 describe the same point.
    z.iter()
        .flat_map(|c| [c.re + 0.0, c.im + 0.0])
        .map(f64::to_bits)
        .collect()
}

impl DiscreteMeasure {
    /// Validates and builds a measure: atoms pairwise distinct, weights positive and finite.
    pub fn new(atoms: Vec<Vec<Complex64>>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("measure needs at least one atom".into()));
        }
        if atoms.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        let dim = atoms[0].len();
        if dim == 0 {
            return Err(Error::InvalidInput("atoms must have dimension >= 1".into()));
        }
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::with_capacity(atoms.len());
        for (i, a) in atoms.iter().enumerate() {
            if a.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: a.len() });
            }
            if a.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::InvalidInput(format!("atom {i} has a non-finite coordinate")));
            }
            if let Some(&first) = seen.get(&atom_key(a)) {
                return Err(Error::DuplicateAtoms { first, second: i });
            }
            seen.insert(atom_key(a), i);
        }
        for (index, &weight) in weights.iter().enumerate() {
            if !(weight > 0.0) || !weight.is_finite() {
                return Err(Error::NonPositiveWeight { index, weight });
            }
        }
        Ok(DiscreteMeasure { dim, atoms, weights })
    }

    /// Equal weights `1/N`.
    pub fn uniform(atoms: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = atoms.len().max(1);
        let w = vec![1.0 / n as f64; atoms.len()];
        Self::new(atoms, w)
    }

    /// One-dimensional measure from complex points.
    pub fn from_points_1d(points: &[Complex64], weights: Vec<f64>) -> Result<Self> {
        Self::new(points.iter().map(|&p| vec![p]).collect(), weights)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Vec<Complex64>] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &[Complex64] {
        &self.atoms[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `self + other`, rejecting atoms shared by both.
    pub fn union(&self, other: &DiscreteMeasure) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        let mut weights = self.weights.clone();
        weights.extend_from_slice(&other.weights);
        Self::new(atoms, weights)
    }

    /// Same atoms, weights multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.atoms.clone(), self.weights.iter().map(|w| w * factor).collect())
    }

    /// Same atoms, new weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.atoms.clone(), weights)
    }

    /// Weighted coordinate-wise mean.
    pub fn mean(&self) -> Vec<Complex64> {
        let total = self.total_mass();
        let mut m = vec![Complex64::new(0.0, 0.0); self.dim];
        for (a, &w) in self.atoms.iter().zip(&self.weights) {
            for (mj, aj) in m.iter_mut().zip(a) {
                *mj += aj * w;
            }
        }
        m.iter().map(|x| x / total).collect()
    }
}

/// Continuous measure approximated by a cubature rule.
#[derive(Clone, Debug)]
pub struct QuadratureMeasure {
    pub measure: DiscreteMeasure,
    pub label: String,
    pub target_mass: f64,
}

impl QuadratureMeasure {
    pub fn new(measure: DiscreteMeasure, label: &str, target_mass: f64, tol: f64) -> Result<Self> {
        let mass = measure.total_mass();
        if (mass - target_mass).abs() > tol * target_mass.abs().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "quadrature mass {mass} differs from target {target_mass} for {label}"
            )));
        }
        Ok(QuadratureMeasure { measure, label: label.to_string(), target_mass })
    }
}

/// Coordinate-wise affine change `z -> B z + b` together with the mass scale `c`.
///
/// Kernels transform as `K^mu(z, w) = c K^{mu~}(B z + b, B w + b)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub scale: Vec<Complex64>,
    pub shift: Vec<Complex64>,
    pub mass_scale: f64,
}

impl AffineMap {
    pub fn identity(dim: usize) -> Self {
        AffineMap {
            scale: vec![Complex64::new(1.0, 0.0); dim],
            shift: vec![Complex64::new(0.0, 0.0); dim],
            mass_scale: 1.0,
        }
    }

    pub fn new(scale: Vec<Complex64>, shift: Vec<Complex64>, mass_scale: f64) -> Result<Self> {
        if scale.len() != shift.len() {
            return Err(Error::DimensionMismatch { expected: scale.len(), found: shift.len() });
        }
        if scale.iter().any(|b| b.norm() == 0.0) {
            return Err(Error::InvalidInput("affine scale entries must be non-zero".into()));
        }
        if !(mass_scale > 0.0) {
            return Err(Error::InvalidInput("mass scale must be positive".into()));
        }
        Ok(AffineMap { scale, shift, mass_scale })
    }

    pub fn dim(&self) -> usize {
        self.scale.len()
    }

    pub fn apply(&self, z: &[Complex64]) -> Vec<Complex64> {
        z.iter()
            .zip(self.scale.iter().zip(&self.shift))
            .map(|(x, (b, s))| b * x + s)
            .collect()
    }

    pub fn apply_into(&self, z: &[Complex64], out: &mut [Complex64]) {
        for (o, (x, (b, s))) in out.iter_mut().zip(z.iter().zip(self.scale.iter().zip(&self.shift))) {
            *o = b * x + s;
        }
    }

    pub fn is_identity(&self) -> bool {
        self.mass_scale == 1.0
            && self.scale.iter().all(|b| *b == Complex64::new(1.0, 0.0))
            && self.shift.iter().all(|s| *s == Complex64::new(0.0, 0.0))
    }
}

/// Rescales a cloud to total mass 1, weighted mean 0 and coordinate moduli at most 1.
///
/// A coordinate in which all atoms agree keeps scale 1.
pub fn normalize_cloud(measure: &DiscreteMeasure) -> Result<(DiscreteMeasure, AffineMap)> {
    if measure.len() < 2 {
        return Err(Error::InvalidInput("normalization needs at least 2 atoms".into()));
    }
    let (map, normalized) = normalization_of(measure);
    Ok((normalized, map))
}

pub(crate) fn normalization_of(measure: &DiscreteMeasure) -> (AffineMap, DiscreteMeasure) {
    let total = measure.total_mass();
    let mean = measure.mean();
    let dim = measure.dim();
    let mut spread = vec![0.0f64; dim];
    for a in measure.atoms() {
        for j in 0..dim {
            spread[j] = spread[j].max((a[j] - mean[j]).norm());
        }
    }
    let scale: Vec<Complex64> = spread
        .iter()
        .map(|&s| Complex64::new(if s > 0.0 { 1.0 / s } else { 1.0 }, 0.0))
        .collect();
    let shift: Vec<Complex64> = scale.iter().zip(&mean).map(|(b, m)| -b * m).collect();
    let map = AffineMap { scale, shift, mass_scale: 1.0 / total };
    let atoms = measure.atoms().iter().map(|a| map.apply(a)).collect();
    let weights = measure.weights().iter().map(|w| w / total).collect();
    // Positive scales keep distinct atoms distinct, except when rounding merges
    // two nearly identical points; fall back to the unchecked form in that case.
    let normalized = DiscreteMeasure::new(atoms, weights).unwrap_or_else(|_| DiscreteMeasure {
        dim,
        atoms: measure.atoms().iter().map(|a| map.apply(a)).collect(),
        weights: measure.weights().iter().map(|w| w / total).collect(),
    });
    (map, normalized)
}

/// Maps real points `(x_1, ..., x_{2d})` to `(x_1 + i x_2, ..., x_{2d-1} + i x_{2d})`.
pub fn embed_real_pairs(points: &[Vec<f64>], weights: Option<Vec<f64>>) -> Result<DiscreteMeasure> {
    let real_dim = points
        .first()
        .map(|p| p.len())
        .ok_or_else(|| Error::InvalidInput("empty real cloud".into()))?;
    if real_dim == 0 || real_dim % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "real dimension {real_dim} is not a positive even number"
        )));
    }
    let mut atoms = Vec::with_capacity(points.len());
    for p in points {
        if p.len() != real_dim {
            return Err(Error::DimensionMismatch { expected: real_dim, found: p.len() });
        }
        atoms.push(p.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect());
    }
    match weights {
        Some(w) => DiscreteMeasure::new(atoms, w),
        None => DiscreteMeasure::uniform(atoms),
    }
}

/// On-disk cloud formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CloudFormat {
    Csv,
    Json,
}

impl CloudFormat {
    /// Guesses the format from the file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => CloudFormat::Json,
            _ => CloudFormat::Csv,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CloudJson {
    d: usize,
    atoms: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
}

/// Loads a cloud; missing weights default to `1/N`.
pub fn load_cloud(path: &Path, format: CloudFormat) -> Result<DiscreteMeasure> {
    let text = std::fs::read_to_string(path)?;
    match format {
        CloudFormat::Csv => parse_csv(&text),
        CloudFormat::Json => parse_json(&text),
    }
}

/// Parses the CSV layout `re1,im1,...,red,imd[,weight]`; `#` starts a comment line.
pub fn parse_csv(text: &str) -> Result<DiscreteMeasure> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header_line = reader.position().line();
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse { line: header_line.max(1), message: e.to_string() })?
        .clone();
    let names: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
    let has_weight = names.last().map(|h| h == "weight").unwrap_or(false);
    let coord_cols = names.len() - usize::from(has_weight);
    if coord_cols == 0 || !coord_cols.is_multiple_of(2) {
        return Err(Error::Parse {
            line: 1,
            message: format!("header has {coord_cols} coordinate columns, expected re/im pairs"),
        });
    }
    for (k, pair) in names[..coord_cols].chunks(2).enumerate() {
        let (re, im) = (format!("re{}", k + 1), format!("im{}", k + 1));
        if pair[0] != re || pair[1] != im {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected columns {re},{im}, found {},{}", pair[0], pair[1]),
            });
        }
    }
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != names.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", names.len(), record.len()),
            });
        }
        let mut values = Vec::with_capacity(record.len());
        for field in record.iter() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("'{field}' is not a number"),
            })?;
            values.push(v);
        }
        atoms.push(
            values[..coord_cols]
                .chunks(2)
                .map(|c| Complex64::new(c[0], c[1]))
                .collect::<Vec<_>>(),
        );
        if has_weight {
            weights.push(values[coord_cols]);
        }
    }
    if atoms.is_empty() {
        return Err(Error::InvalidInput("cloud file contains no atoms".into()));
    }
    if has_weight {
        DiscreteMeasure::new(atoms, weights)
    } else {
        DiscreteMeasure::uniform(atoms)
    }
}

/// Parses `{"d": int, "atoms": [[re, im, ...], ...], "weights": [...]}`.
pub fn parse_json(text: &str) -> Result<DiscreteMeasure> {
    let raw: CloudJson = serde_json::from_str(text)?;
    if raw.d == 0 {
        return Err(Error::InvalidInput("d must be at least 1".into()));
    }
    let mut atoms = Vec::with_capacity(raw.atoms.len());
    for (i, row) in raw.atoms.iter().enumerate() {
        if row.len() != 2 * raw.d {
            return Err(Error::InvalidInput(format!(
                "atom {i} has {} reals, expected {}",
                row.len(),
                2 * raw.d
            )));
        }
        atoms.push(row.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect::<Vec<_>>());
    }
    match raw.weights {
        Some(w) => DiscreteMeasure::new(atoms, w),
        None => DiscreteMeasure::uniform(atoms),
    }
}

/// Serializes to CSV with a weight column; floats use shortest round-trip form.
pub fn cloud_to_csv(measure: &DiscreteMeasure) -> String {
    let mut out = String::new();
    let header: Vec<String> = (1..=measure.dim())
        .flat_map(|k| [format!("re{k}"), format!("im{k}")])
        .chain(std::iter::once("weight".to_string()))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (a, w) in measure.atoms().iter().zip(measure.weights()) {
        let mut fields: Vec<String> = a.iter().flat_map(|c| [c.re.to_string(), c.im.to_string()]).collect();
        fields.push(w.to_string());
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Serializes to the JSON layout read by [`parse_json`].
pub fn cloud_to_json(measure: &DiscreteMeasure) -> String {
    let raw = CloudJson {
        d: measure.dim(),
        atoms: measure
            .atoms()
            .iter()
            .map(|a| a.iter().flat_map(|c| [c.re, c.im]).collect())
            .collect(),
        weights: Some(measure.weights().to_vec()),
    };
    serde_json::to_string(&raw).expect("cloud serialization cannot fail")
}

pub fn save_cloud(measure: &DiscreteMeasure, path: &Path, format: CloudFormat) -> Result<()> {
    let text = match format {
        CloudFormat::Csv => cloud_to_csv(measure),
        CloudFormat::Json => cloud_to_json(measure),
    };
    std::fs::write(path, text)?;
    Ok(())
}
