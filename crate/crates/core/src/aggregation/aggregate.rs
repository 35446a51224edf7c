use serde::{Deserialize, Serialize};

use crate::draws::{Draws, ParamShape};
use crate::error::{Error, Result};
use crate::exec::Backend;
use crate::linalg::{self, Matrix};
use crate::samplers::SubposteriorSampleSet;

use super::eigen::canonical_eigendecomposition;
use super::weights::{WeightFamily, WeightSet};

/// Most negative eigenvalue accepted for PSD inputs.
pub const PSD_TOLERANCE: f64 = -1e-10;

/// Where an aggregated set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub weight_set: u64,
    pub sample_set: u64,
}

/// `T` aggregated draws.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedSampleSet {
    pub shape: ParamShape,
    pub draws: Draws,
    pub provenance: Provenance,
}

impl AggregatedSampleSet {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }
}

/// Dispatches on the weight family, running on the default backend.
pub fn aggregate(weights: &WeightSet, samples: &SubposteriorSampleSet) -> Result<AggregatedSampleSet> {
    aggregate_with(Backend::default(), weights, samples)
}

pub fn aggregate_with(backend: Backend, weights: &WeightSet, samples: &SubposteriorSampleSet) -> Result<AggregatedSampleSet> {
    weights.check_shape(samples.shape())?;
    Error::check_dim(weights.k(), samples.k())?;
    let rows = match weights.family() {
        WeightFamily::Vector => backend.map(samples.t(), |t| Ok(linear_draw(weights, samples, t))),
        WeightFamily::Spectral => backend.map(samples.t(), |t| spectral_draw(weights, samples, t)),
        WeightFamily::Combinatorial => backend.map(samples.t(), |t| Ok(combinatorial_draw(weights, samples, t))),
    };
    let dim = samples.shape().flat_len();
    let mut draws = Draws::with_capacity(dim, samples.t());
    for r in rows {
        draws.push(&r?)?;
    }
    Ok(AggregatedSampleSet {
        shape: samples.shape(),
        draws,
        provenance: Provenance {
            weight_set: weights.fingerprint(),
            sample_set: samples.fingerprint(),
        },
    })
}

fn require(weights: &WeightSet, family: WeightFamily, samples: &SubposteriorSampleSet) -> Result<()> {
    if weights.family() != family {
        return Err(Error::config(format!("expected {family:?} weights, got {:?}", weights.family())));
    }
    weights.check_shape(samples.shape())?;
    Error::check_dim(weights.k(), samples.k())
}

/// `θ̂_t = Σ_k w_k ∘ θ_{k,t}`.
pub fn aggregate_linear(weights: &WeightSet, samples: &SubposteriorSampleSet) -> Result<AggregatedSampleSet> {
    require(weights, WeightFamily::Vector, samples)?;
    aggregate(weights, samples)
}

/// `Σ_k R_kᵀ diag(w_k ∘ D_k) R_k` per draw.
pub fn aggregate_spectral(weights: &WeightSet, samples: &SubposteriorSampleSet) -> Result<AggregatedSampleSet> {
    require(weights, WeightFamily::Spectral, samples)?;
    aggregate(weights, samples)
}

/// `θ̂^ℓ_t = Σ_k w_{kℓ} ∘ θ_{k, a_{kℓ}, t}`.
pub fn aggregate_combinatorial(weights: &WeightSet, samples: &SubposteriorSampleSet) -> Result<AggregatedSampleSet> {
    require(weights, WeightFamily::Combinatorial, samples)?;
    aggregate(weights, samples)
}

fn linear_draw(weights: &WeightSet, samples: &SubposteriorSampleSet, t: usize) -> Vec<f64> {
    let mut out = vec![0.0; weights.d()];
    for k in 0..weights.k() {
        for ((o, w), x) in out.iter_mut().zip(weights.block(k, 0)).zip(samples.draw(k, t)) {
            *o += w * x;
        }
    }
    out
}

fn combinatorial_draw(weights: &WeightSet, samples: &SubposteriorSampleSet, t: usize) -> Vec<f64> {
    let (l, d) = (weights.l(), weights.d());
    let alignment = weights.alignment().expect("combinatorial weights carry an alignment");
    let mut out = vec![0.0; l * d];
    for k in 0..weights.k() {
        let theta = samples.draw(k, t);
        for (g, &m) in alignment.perm(k).iter().enumerate() {
            let w = weights.block(k, g);
            for j in 0..d {
                out[g * d + j] += w[j] * theta[m * d + j];
            }
        }
    }
    out
}

/// Spectral combination of one index-aligned tuple of PSD matrices.
pub fn spectral_combine(weights: &WeightSet, matrices: &[Matrix]) -> Result<Matrix> {
    let d = weights.d();
    let mut out = Matrix::zeros(d, d);
    for (k, m) in matrices.iter().enumerate() {
        let (r, vals) = canonical_eigendecomposition(m)?;
        if let Some(&lo) = vals.last() {
            if lo < PSD_TOLERANCE {
                return Err(Error::domain(format!(
                    "partition {k} draw has eigenvalue {lo:e} below the PSD tolerance"
                )));
            }
        }
        let w = weights.block(k, 0);
        if matrices.len() == 1 && w.iter().all(|&x| x == 1.0) {
            return Ok(m.clone());
        }
        let scaled: Vec<f64> = vals.iter().zip(w).map(|(v, w)| v * w).collect();
        out += super::eigen::reconstruct(&r, &scaled);
    }
    Ok(linalg::symmetrize(&out))
}

fn spectral_draw(weights: &WeightSet, samples: &SubposteriorSampleSet, t: usize) -> Result<Vec<f64>> {
    let d = weights.d();
    let mats = (0..weights.k())
        .map(|k| linalg::matrix_from_flat(d, samples.draw(k, t)))
        .collect::<Result<Vec<_>>>()?;
    Ok(linalg::matrix_to_flat(&spectral_combine(weights, &mats)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::{uniform_weights, Alignment};
    use crate::models::TemperingMode;

    fn set(shape: ParamShape, parts: Vec<Vec<Vec<f64>>>) -> SubposteriorSampleSet {
        let k = parts.len();
        let draws = parts.into_iter().map(|p| Draws::from_rows(shape.flat_len(), &p).unwrap()).collect();
        SubposteriorSampleSet::new(shape, TemperingMode::Subposterior { k }, draws, vec![0; k]).unwrap()
    }

    #[test]
    fn linear_examples() {
        let shape = ParamShape::Vector { d: 2 };
        let s = set(shape, vec![vec![vec![2.0, 0.0]], vec![vec![0.0, 2.0]]]);
        let out = aggregate_linear(&uniform_weights(2, shape).unwrap(), &s).unwrap();
        assert_eq!(out.draws.row(0), &[1.0, 1.0]);

        let w = WeightSet::new(WeightFamily::Vector, 2, 1, 2, vec![0.25, 0.75, 0.75, 0.25], None).unwrap();
        let s = set(shape, vec![vec![vec![4.0, 4.0]], vec![vec![0.0, 0.0]]]);
        assert_eq!(aggregate_linear(&w, &s).unwrap().draws.row(0), &[1.0, 3.0]);
    }

    #[test]
    fn single_partition_is_identity() {
        let shape = ParamShape::Vector { d: 3 };
        let rows = vec![vec![0.1, -2.5, 3.0], vec![1e10, 1e-10, -0.0]];
        let s = set(shape, vec![rows.clone()]);
        let out = aggregate_linear(&uniform_weights(1, shape).unwrap(), &s).unwrap();
        assert_eq!(&out.draws, s.partition(0));
    }

    #[test]
    fn spectral_pairs_descending_eigenvalues() {
        let shape = ParamShape::SymMatrix { d: 2 };
        let s = set(shape, vec![vec![vec![4.0, 0.0, 0.0, 1.0]], vec![vec![2.0, 0.0, 0.0, 2.0]]]);
        let out = aggregate_spectral(&uniform_weights(2, shape).unwrap(), &s).unwrap();
        let r = out.draws.row(0);
        assert!((r[0] - 3.0).abs() < 1e-12 && (r[3] - 1.5).abs() < 1e-12 && r[1].abs() < 1e-12);
    }

    #[test]
    fn spectral_single_partition_is_exact() {
        let shape = ParamShape::SymMatrix { d: 2 };
        let rows = vec![vec![2.0, 0.3, 0.3, 1.0 / 3.0]];
        let s = set(shape, vec![rows]);
        let out = aggregate_spectral(&uniform_weights(1, shape).unwrap(), &s).unwrap();
        assert_eq!(&out.draws, s.partition(0));
    }

    #[test]
    fn spectral_rejects_indefinite_input() {
        let shape = ParamShape::SymMatrix { d: 2 };
        let s = set(shape, vec![vec![vec![1.0, 0.0, 0.0, -1.0]]]);
        assert!(aggregate_spectral(&uniform_weights(1, shape).unwrap(), &s).is_err());
    }

    #[test]
    fn combinatorial_hand_example() {
        let shape = ParamShape::Clusters { l: 2, d: 2 };
        let s = set(shape, vec![vec![vec![1.0, 1.0, 3.0, 3.0]], vec![vec![5.0, 5.0, -1.0, -1.0]]]);
        let a = Alignment::new(vec![vec![0, 1], vec![1, 0]]).unwrap();
        let w = crate::aggregation::uniform_weights_aligned(&a, shape).unwrap();
        let out = aggregate_combinatorial(&w, &s).unwrap();
        assert_eq!(out.draws.row(0), &[0.0, 0.0, 4.0, 4.0]);
    }

    #[test]
    fn family_mismatch_is_rejected() {
        let shape = ParamShape::Vector { d: 2 };
        let s = set(shape, vec![vec![vec![1.0, 1.0]]]);
        let w = uniform_weights(1, ParamShape::SymMatrix { d: 2 }).unwrap();
        assert!(aggregate_linear(&w, &s).is_err());
        assert!(aggregate_spectral(&uniform_weights(1, shape).unwrap(), &s).is_err());
    }

    #[test]
    fn backends_agree() {
        let shape = ParamShape::Vector { d: 2 };
        let rows: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64, (i * i) as f64 * 0.01]).collect();
        let s = set(shape, vec![rows.clone(), rows.iter().rev().cloned().collect()]);
        let w = uniform_weights(2, shape).unwrap();
        let a = aggregate_with(Backend::Sequential, &w, &s).unwrap();
        let b = aggregate_with(Backend::default(), &w, &s).unwrap();
        assert_eq!(a, b);
    }
}
