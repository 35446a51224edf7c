use crate::draws::ParamShape;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::samplers::SubposteriorSampleSet;

use super::hungarian::hungarian;
use super::weights::Alignment;

/// `C_{ℓm} = ‖θ̄_{km} − θ̄_{1ℓ}‖²` for flattened `L×d` cluster means.
pub fn alignment_cost(reference: &[f64], other: &[f64], l: usize, d: usize) -> Matrix {
    Matrix::from_fn(l, l, |a, m| {
        (0..d).map(|j| (other[m * d + j] - reference[a * d + j]).powi(2)).sum()
    })
}

/// Total alignment objective `Σ_k Σ_ℓ ‖θ̄_{k a_{kℓ}} − θ̄_{1ℓ}‖²`.
pub fn alignment_objective(means: &[Vec<f64>], alignment: &Alignment, d: usize) -> f64 {
    let l = alignment.l();
    means
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let c = alignment_cost(&means[0], m, l, d);
            alignment.perm(k).iter().enumerate().map(|(a, &b)| c[(a, b)]).sum::<f64>()
        })
        .sum()
}

/// Aligns each partition's cluster labels to partition 0 by exact
/// minimum-cost matching of sample-mean centers.
pub fn align_clusters(samples: &SubposteriorSampleSet) -> Result<Alignment> {
    let ParamShape::Clusters { l, d } = samples.shape() else {
        return Err(Error::config("cluster alignment needs mixture parameters"));
    };
    if let Some(k) = samples.partitions().iter().position(|p| p.is_empty()) {
        return Err(Error::TooFewSamples {
            partition: k,
            needed: 1,
            got: 0,
        });
    }
    let means: Vec<Vec<f64>> = samples.partitions().iter().map(|p| p.mean()).collect();
    align_means(&means, l, d)
}

/// [`align_clusters`] on precomputed means.
pub fn align_means(means: &[Vec<f64>], l: usize, d: usize) -> Result<Alignment> {
    let Some(reference) = means.first() else {
        return Err(Error::config("alignment needs at least one partition"));
    };
    let mut perms = vec![(0..l).collect::<Vec<_>>()];
    for m in &means[1..] {
        Error::check_dim(l * d, m.len())?;
        perms.push(hungarian(&alignment_cost(reference, m, l, d))?);
    }
    Alignment::new(perms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn identical_means_give_identity() {
        let m = vec![1.0, 2.0, -3.0, 0.5, 4.0, 4.0];
        let a = align_means(&[m.clone(), m.clone(), m], 3, 2).unwrap();
        assert_eq!(a, Alignment::identity(3, 3));
    }

    #[test]
    fn swapped_clusters_are_detected() {
        let a = align_means(&[vec![0.0, 0.0, 5.0, 5.0], vec![5.0, 5.0, 0.0, 0.0]], 2, 2).unwrap();
        assert_eq!(a.perm(1), &[1, 0]);
    }

    #[test]
    fn never_worse_than_identity() {
        let mut rng = crate::rng::rng_from_seed(5);
        for _ in 0..50 {
            let means: Vec<Vec<f64>> = (0..3).map(|_| (0..8).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
            let a = align_means(&means, 4, 2).unwrap();
            let id = Alignment::identity(3, 4);
            assert!(alignment_objective(&means, &a, 2) <= alignment_objective(&means, &id, 2) + 1e-12);
        }
    }
}
