use serde::{Deserialize, Serialize};

use crate::draws::ParamShape;
use crate::error::{Error, Result};
use crate::models::SubposteriorMoments;
use crate::samplers::SubposteriorSampleSet;

use super::eigen::canonical_eigendecomposition;
use super::projection::project_to_floored_simplex;

/// Lower bound on every weight entry.
pub const WEIGHT_FLOOR: f64 = 1e-6;

/// Regularizer added to sample variances before inversion.
pub const VARIANCE_JITTER: f64 = 1e-12;

const SUM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightFamily {
    /// Diagonal weights on parameter coordinates.
    Vector,
    /// Diagonal weights on the descending eigenvalues of a PSD matrix.
    Spectral,
    /// Per-cluster diagonal weights plus a label alignment.
    Combinatorial,
}

impl WeightFamily {
    /// The natural family for a parameter shape.
    pub fn for_shape(shape: ParamShape) -> Self {
        match shape {
            ParamShape::Vector { .. } => WeightFamily::Vector,
            ParamShape::SymMatrix { .. } => WeightFamily::Spectral,
            ParamShape::Clusters { .. } => WeightFamily::Combinatorial,
        }
    }
}

/// `K` permutations of the cluster labels; `perms[k][ℓ]` is the worker-`k`
/// cluster assigned to global label `ℓ`. The first permutation is the
/// identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Alignment {
    perms: Vec<Vec<usize>>,
}

impl Alignment {
    pub fn identity(k: usize, l: usize) -> Self {
        Alignment {
            perms: vec![(0..l).collect(); k],
        }
    }

    pub fn new(perms: Vec<Vec<usize>>) -> Result<Self> {
        let a = Alignment { perms };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.perms.first() else {
            return Err(Error::config("alignment needs at least one permutation"));
        };
        let l = first.len();
        if first.iter().enumerate().any(|(i, &p)| i != p) {
            return Err(Error::config("the first alignment permutation must be the identity"));
        }
        for (k, p) in self.perms.iter().enumerate() {
            Error::check_dim(l, p.len())?;
            let mut seen = vec![false; l];
            for &m in p {
                if m >= l || std::mem::replace(&mut seen[m], true) {
                    return Err(Error::config(format!("alignment for partition {k} is not a permutation")));
                }
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.perms.len()
    }

    pub fn l(&self) -> usize {
        self.perms[0].len()
    }

    pub fn perm(&self, k: usize) -> &[usize] {
        &self.perms[k]
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }
}

/// Diagonal aggregation weights, stored `[k][ℓ][j]` (with `L = 1` for the
/// vector and spectral families).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSet {
    family: WeightFamily,
    k: usize,
    l: usize,
    d: usize,
    values: Vec<f64>,
    alignment: Option<Alignment>,
}

impl WeightSet {
    /// Checked constructor; see [`WeightSet::validate`].
    pub fn new(
        family: WeightFamily,
        k: usize,
        l: usize,
        d: usize,
        values: Vec<f64>,
        alignment: Option<Alignment>,
    ) -> Result<Self> {
        let w = Self::unchecked(family, k, l, d, values, alignment)?;
        w.validate(WEIGHT_FLOOR)?;
        Ok(w)
    }

    /// Shape-checked but not simplex-checked; used for raw optimizer iterates.
    pub fn unchecked(
        family: WeightFamily,
        k: usize,
        l: usize,
        d: usize,
        values: Vec<f64>,
        alignment: Option<Alignment>,
    ) -> Result<Self> {
        if k == 0 || l == 0 || d == 0 {
            return Err(Error::config("weight sets need K, L, d >= 1"));
        }
        if family != WeightFamily::Combinatorial && l != 1 {
            return Err(Error::config("only combinatorial weights carry more than one cluster"));
        }
        Error::check_dim(k * l * d, values.len())?;
        match (&alignment, family) {
            (Some(a), WeightFamily::Combinatorial) => {
                a.validate()?;
                Error::check_dim(k, a.k())?;
                Error::check_dim(l, a.l())?;
            }
            (None, WeightFamily::Combinatorial) => {
                return Err(Error::config("combinatorial weights need an alignment"))
            }
            (Some(_), _) => return Err(Error::config("only combinatorial weights carry an alignment")),
            (None, _) => {}
        }
        Ok(WeightSet {
            family,
            k,
            l,
            d,
            values,
            alignment,
        })
    }

    /// Every entry at least `floor` and every `(ℓ, j)` column summing to one
    /// within `1e-10`.
    pub fn validate(&self, floor: f64) -> Result<()> {
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("weight entry {v}")));
        }
        if let Some(v) = self.values.iter().find(|&&v| v < floor) {
            return Err(Error::domain(format!("weight entry {v:e} is below the floor {floor:e}")));
        }
        for l in 0..self.l {
            for j in 0..self.d {
                let s: f64 = (0..self.k).map(|k| self.get(k, l, j)).sum();
                if (s - 1.0).abs() > SUM_TOLERANCE {
                    return Err(Error::domain(format!("weights for cluster {l}, coordinate {j} sum to {s}")));
                }
            }
        }
        Ok(())
    }

    pub fn family(&self) -> WeightFamily {
        self.family
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Entries per partition, `L·d`.
    pub fn block_len(&self) -> usize {
        self.l * self.d
    }

    pub fn alignment(&self) -> Option<&Alignment> {
        self.alignment.as_ref()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    fn index(&self, k: usize, l: usize, j: usize) -> usize {
        (k * self.l + l) * self.d + j
    }

    pub fn get(&self, k: usize, l: usize, j: usize) -> f64 {
        self.values[self.index(k, l, j)]
    }

    /// All weights of partition `k`, length `L·d`.
    pub fn partition(&self, k: usize) -> &[f64] {
        let n = self.block_len();
        &self.values[k * n..(k + 1) * n]
    }

    /// Weights `w_{kℓ}` of partition `k`, cluster `ℓ`.
    pub fn block(&self, k: usize, l: usize) -> &[f64] {
        let start = self.index(k, l, 0);
        &self.values[start..start + self.d]
    }

    /// Same layout, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::unchecked(self.family, self.k, self.l, self.d, values, self.alignment.clone())
    }

    /// Whether the set can aggregate draws of `shape`.
    pub fn check_shape(&self, shape: ParamShape) -> Result<()> {
        let (l, d) = match (self.family, shape) {
            (WeightFamily::Vector, ParamShape::Vector { d }) => (1, d),
            (WeightFamily::Vector, ParamShape::SymMatrix { d }) => (1, d * d),
            (WeightFamily::Vector, ParamShape::Clusters { l, d }) => (1, l * d),
            (WeightFamily::Spectral, ParamShape::SymMatrix { d }) => (1, d),
            (WeightFamily::Combinatorial, ParamShape::Clusters { l, d }) => (l, d),
            (family, shape) => {
                return Err(Error::config(format!("{family:?} weights cannot aggregate {shape:?} parameters")))
            }
        };
        Error::check_dim(l, self.l)?;
        Error::check_dim(d, self.d)
    }

    /// Stable 64-bit fingerprint.
    pub fn fingerprint(&self) -> u64 {
        let mut h = crate::rng::mix64(((self.k as u64) << 32) ^ ((self.l as u64) << 16) ^ self.d as u64);
        h = crate::rng::mix64(h ^ self.family as u64);
        for v in &self.values {
            h = crate::rng::mix64(h ^ v.to_bits());
        }
        if let Some(a) = &self.alignment {
            for p in a.perms() {
                for &m in p {
                    h = crate::rng::mix64(h ^ m as u64);
                }
            }
        }
        h
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&WeightSetJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: WeightSetJson = serde_json::from_str(s)?;
        raw.try_into()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NestedWeights {
    Flat(Vec<Vec<f64>>),
    Clustered(Vec<Vec<Vec<f64>>>),
}

#[derive(Serialize, Deserialize)]
struct WeightSetJson {
    family: WeightFamily,
    #[serde(rename = "K")]
    k: usize,
    d: usize,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    l: Option<usize>,
    weights: NestedWeights,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alignment: Option<Alignment>,
}

impl From<&WeightSet> for WeightSetJson {
    fn from(w: &WeightSet) -> Self {
        let weights = if w.family == WeightFamily::Combinatorial {
            NestedWeights::Clustered(
                (0..w.k)
                    .map(|k| (0..w.l).map(|l| w.block(k, l).to_vec()).collect())
                    .collect(),
            )
        } else {
            NestedWeights::Flat((0..w.k).map(|k| w.block(k, 0).to_vec()).collect())
        };
        WeightSetJson {
            family: w.family,
            k: w.k,
            d: w.d,
            l: (w.family == WeightFamily::Combinatorial).then_some(w.l),
            weights,
            alignment: w.alignment.clone(),
        }
    }
}

impl TryFrom<WeightSetJson> for WeightSet {
    type Error = Error;

    fn try_from(j: WeightSetJson) -> Result<Self> {
        let l = j.l.unwrap_or(1);
        let mut values = Vec::with_capacity(j.k * l * j.d);
        match j.weights {
            NestedWeights::Flat(rows) => {
                Error::check_dim(j.k, rows.len())?;
                for r in rows {
                    Error::check_dim(j.d, r.len())?;
                    values.extend(r);
                }
            }
            NestedWeights::Clustered(parts) => {
                Error::check_dim(j.k, parts.len())?;
                for p in parts {
                    Error::check_dim(l, p.len())?;
                    for r in p {
                        Error::check_dim(j.d, r.len())?;
                        values.extend(r);
                    }
                }
            }
        }
        WeightSet::new(j.family, j.k, l, j.d, values, j.alignment)
    }
}

fn layout(k: usize, shape: ParamShape) -> (WeightFamily, usize, usize, Option<Alignment>) {
    let family = WeightFamily::for_shape(shape);
    match shape {
        ParamShape::Vector { d } | ParamShape::SymMatrix { d } => (family, 1, d, None),
        ParamShape::Clusters { l, d } => (family, l, d, Some(Alignment::identity(k, l))),
    }
}

/// All entries `1/K`, in the natural family for `shape` (identity alignment
/// for clusters).
pub fn uniform_weights(k: usize, shape: ParamShape) -> Result<WeightSet> {
    if k == 0 {
        return Err(Error::config("uniform weights need K >= 1"));
    }
    let (family, l, d, alignment) = layout(k, shape);
    WeightSet::new(family, k, l, d, vec![1.0 / k as f64; k * l * d], alignment)
}

/// Uniform weights in the natural family carrying a given alignment.
pub fn uniform_weights_aligned(alignment: &Alignment, shape: ParamShape) -> Result<WeightSet> {
    let mut w = uniform_weights(alignment.k(), shape)?;
    if w.family != WeightFamily::Combinatorial {
        return Err(Error::config("alignments only apply to cluster parameters"));
    }
    Error::check_dim(w.l, alignment.l())?;
    w.alignment = Some(alignment.clone());
    Ok(w)
}

/// Unbiased variance of each column of `rows`.
fn column_variances(rows: impl Iterator<Item = Vec<f64>>, p: usize) -> (usize, Vec<f64>) {
    let mut n = 0usize;
    let mut mean = vec![0.0; p];
    let mut m2 = vec![0.0; p];
    for r in rows {
        n += 1;
        for j in 0..p {
            let delta = r[j] - mean[j];
            mean[j] += delta / n as f64;
            m2[j] += delta * (r[j] - mean[j]);
        }
    }
    let var = m2.iter().map(|s| if n > 1 { s / (n - 1) as f64 } else { 0.0 }).collect();
    (n, var)
}

/// Per-partition variances in weight layout `[ℓ][j]`.
fn partition_variances(samples: &SubposteriorSampleSet, alignment: Option<&Alignment>) -> Result<Vec<Vec<f64>>> {
    let shape = samples.shape();
    let mut out = Vec::with_capacity(samples.k());
    for (k, draws) in samples.partitions().iter().enumerate() {
        if draws.len() < 2 {
            return Err(Error::TooFewSamples {
                partition: k,
                needed: 2,
                got: draws.len(),
            });
        }
        let var = match shape {
            ParamShape::Vector { d } => column_variances(draws.rows().map(<[f64]>::to_vec), d).1,
            ParamShape::SymMatrix { d } => {
                let mut spectra = Vec::with_capacity(draws.len());
                for row in draws.rows() {
                    let m = crate::linalg::matrix_from_flat(d, row)?;
                    spectra.push(canonical_eigendecomposition(&m)?.1);
                }
                column_variances(spectra.into_iter(), d).1
            }
            ParamShape::Clusters { l, d } => {
                let a = alignment.ok_or_else(|| Error::config("cluster weights need an alignment"))?;
                let perm = a.perm(k).to_vec();
                let aligned = draws.rows().map(move |row| {
                    let mut v = Vec::with_capacity(l * d);
                    for &m in &perm {
                        v.extend_from_slice(&row[m * d..(m + 1) * d]);
                    }
                    v
                });
                column_variances(aligned, l * d).1
            }
        };
        out.push(var);
    }
    Ok(out)
}

fn precision_weights(
    family: WeightFamily,
    l: usize,
    d: usize,
    variances: &[Vec<f64>],
    alignment: Option<Alignment>,
) -> Result<WeightSet> {
    let k = variances.len();
    let mut values = vec![0.0; k * l * d];
    for c in 0..l * d {
        let column: Vec<f64> = variances.iter().map(|v| 1.0 / (v[c] + VARIANCE_JITTER)).collect();
        let total: f64 = column.iter().sum();
        let mut w: Vec<f64> = column.iter().map(|p| p / total).collect();
        if w.iter().any(|&x| x < WEIGHT_FLOOR) {
            w = project_to_floored_simplex(&w, WEIGHT_FLOOR)?;
        }
        for (kk, v) in w.into_iter().enumerate() {
            values[kk * l * d + c] = v;
        }
    }
    WeightSet::new(family, k, l, d, values, alignment)
}

/// Inverse-variance weights normalized per coordinate. Vector parameters use
/// coordinate variances and PSD matrices the variances of their sorted
/// eigenvalues; cluster parameters need [`gaussian_weights_aligned`].
pub fn gaussian_weights(samples: &SubposteriorSampleSet) -> Result<WeightSet> {
    let (family, l, d, _) = layout(samples.k(), samples.shape());
    if family == WeightFamily::Combinatorial {
        return Err(Error::config("cluster parameters need an alignment; use gaussian_weights_aligned"));
    }
    precision_weights(family, l, d, &partition_variances(samples, None)?, None)
}

/// Inverse-variance weights on aligned cluster coordinates.
pub fn gaussian_weights_aligned(samples: &SubposteriorSampleSet, alignment: &Alignment) -> Result<WeightSet> {
    let ParamShape::Clusters { l, d } = samples.shape() else {
        return Err(Error::config("alignments only apply to cluster parameters"));
    };
    Error::check_dim(samples.k(), alignment.k())?;
    Error::check_dim(l, alignment.l())?;
    let var = partition_variances(samples, Some(alignment))?;
    precision_weights(WeightFamily::Combinatorial, l, d, &var, Some(alignment.clone()))
}

/// Gaussian weights for vector parameters from precomputed moments, using
/// the biased variance `S_jj - μ_j²` rescaled by `T/(T-1)`.
pub fn gaussian_weights_from_moments(moments: &SubposteriorMoments, t: usize) -> Result<WeightSet> {
    if t < 2 {
        return Err(Error::TooFewSamples {
            partition: 0,
            needed: 2,
            got: t,
        });
    }
    let d = moments.means.first().map_or(0, Vec::len);
    let scale = t as f64 / (t - 1) as f64;
    let var: Vec<Vec<f64>> = moments
        .means
        .iter()
        .zip(&moments.second)
        .map(|(m, s)| (0..d).map(|j| ((s[(j, j)] - m[j] * m[j]) * scale).max(0.0)).collect())
        .collect();
    precision_weights(WeightFamily::Vector, 1, d, &var, None)
}
