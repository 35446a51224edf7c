//! Aggregation oracles and invariants.

use proptest::prelude::*;
use rand::Rng;
use vcmc::aggregation::{
    aggregate_linear, aggregate_spectral, align_clusters, alignment_objective, canonical_eigendecomposition,
    gaussian_weights, reconstruct, spectral_combine, uniform_weights, Alignment, WeightFamily, WeightSet,
};
use vcmc::linalg::{self, Matrix};
use vcmc::models::TemperingMode;
use vcmc::rng::{rng_from_seed, Rng as ChaRng};
use vcmc::samplers::SubposteriorSampleSet;
use vcmc::{Draws, ParamShape};

fn gaussian(rng: &mut ChaRng) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn alignment_equals_exhaustive_minimum() {
    let mut rng = rng_from_seed(21);
    for inst in 0..100 {
        let l = 1 + inst % 6;
        let d = 2;
        let k = 3;
        let parts: Vec<Draws> = (0..k)
            .map(|_| Draws::from_rows(l * d, &[(0..l * d).map(|_| 3.0 * gaussian(&mut rng)).collect::<Vec<_>>()]).unwrap())
            .collect();
        let samples = SubposteriorSampleSet::new(ParamShape::Clusters { l, d }, TemperingMode::Subposterior { k }, parts, vec![0; k]).unwrap();
        let a = align_clusters(&samples).unwrap();
        let means: Vec<Vec<f64>> = samples.partitions().iter().map(|p| p.mean()).collect();
        let got = alignment_objective(&means, &a, d);
        let perms = permutations(l);
        let mut best = 0.0;
        for kk in 0..k {
            let cost = |p: &Vec<usize>| -> f64 {
                p.iter()
                    .enumerate()
                    .map(|(g, &m)| (0..d).map(|j| (means[kk][m * d + j] - means[0][g * d + j]).powi(2)).sum::<f64>())
                    .sum()
            };
            best += perms.iter().map(cost).fold(f64::INFINITY, f64::min);
        }
        assert_eq!(got, best, "instance {inst}");
        assert!(got <= alignment_objective(&means, &Alignment::identity(k, l), d));
    }
}

#[test]
fn eigendecomposition_reconstructs() {
    let mut rng = rng_from_seed(22);
    for _ in 0..500 {
        let d = rng.random_range(1..=6);
        let b = Matrix::from_fn(d, d, |_, _| gaussian(&mut rng));
        let a = &b + b.transpose();
        let (r, vals) = canonical_eigendecomposition(&a).unwrap();
        assert!((reconstruct(&r, &vals) - &a).norm() <= 1e-9 * a.norm());
    }
}

fn random_rotation(rng: &mut ChaRng, d: usize) -> Matrix {
    let b = Matrix::from_fn(d, d, |_, _| gaussian(rng));
    b.qr().q()
}

fn rotated_psd(rng: &mut ChaRng, d: usize) -> Matrix {
    let q = random_rotation(rng, d);
    let spectrum: Vec<f64> = (0..d)
        .map(|i| if i == 0 && rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..5.0) })
        .collect();
    let m = &q * Matrix::from_diagonal(&linalg::Vector::from_vec(spectrum)) * q.transpose();
    linalg::symmetrize(&m)
}

#[test]
fn spectral_aggregation_preserves_psd() {
    let mut rng = rng_from_seed(23);
    for _ in 0..1000 {
        let d = rng.random_range(1..=5);
        let mats = vec![rotated_psd(&mut rng, d), rotated_psd(&mut rng, d)];
        let raw: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
        let values: Vec<f64> = raw.iter().copied().chain(raw.iter().map(|r| 1.0 - r)).map(|v| v.max(1e-6)).collect();
        let w = WeightSet::unchecked(WeightFamily::Spectral, 2, 1, d, values, None).unwrap();
        let out = spectral_combine(&w, &mats).unwrap();
        assert!(linalg::min_eigenvalue(&out) >= -1e-10);
    }
}

#[test]
fn spectral_identity_for_one_partition() {
    let mut rng = rng_from_seed(24);
    let d = 4;
    let rows: Vec<Vec<f64>> = (0..200).map(|_| linalg::matrix_to_flat(&rotated_psd(&mut rng, d))).collect();
    let shape = ParamShape::SymMatrix { d };
    let samples = SubposteriorSampleSet::new(shape, TemperingMode::Subposterior { k: 1 }, vec![Draws::from_rows(d * d, &rows).unwrap()], vec![0]).unwrap();
    let out = aggregate_spectral(&uniform_weights(1, shape).unwrap(), &samples).unwrap();
    for (a, b) in out.draws.rows().zip(&rows) {
        let a = linalg::matrix_from_flat(d, a).unwrap();
        let b = linalg::matrix_from_flat(d, b).unwrap();
        assert!((&a - &b).norm() <= 1e-9 * b.norm());
    }
}

#[test]
fn gaussian_weights_reduce_to_uniform_for_equal_variances() {
    let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![(i as f64).sin(), (i as f64 * 0.7).cos()]).collect();
    let shifted: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0] + 3.0, r[1] - 1.0]).collect();
    let parts = vec![Draws::from_rows(2, &rows).unwrap(), Draws::from_rows(2, &shifted).unwrap()];
    let samples = SubposteriorSampleSet::new(ParamShape::Vector { d: 2 }, TemperingMode::Subposterior { k: 2 }, parts, vec![0; 2]).unwrap();
    let w = gaussian_weights(&samples).unwrap();
    let u = uniform_weights(2, ParamShape::Vector { d: 2 }).unwrap();
    for (a, b) in w.values().iter().zip(u.values()) {
        assert!((a - b).abs() < 1e-9);
    }
}

proptest! {
    #[test]
    fn linear_aggregation_is_translation_equivariant(
        raw in proptest::collection::vec(0.01f64..1.0, 6),
        draws in proptest::collection::vec(-10.0f64..10.0, 12),
        shift in proptest::collection::vec(-5.0f64..5.0, 2),
    ) {
        let (k, d) = (3, 2);
        let mut values = raw.clone();
        for j in 0..d {
            let s: f64 = (0..k).map(|kk| raw[kk * d + j]).sum();
            for kk in 0..k {
                values[kk * d + j] = raw[kk * d + j] / s;
            }
        }
        let w = WeightSet::new(WeightFamily::Vector, k, 1, d, values, None).unwrap();
        let make = |c: &[f64]| {
            let parts = (0..k)
                .map(|kk| {
                    let rows: Vec<Vec<f64>> = (0..2).map(|t| (0..d).map(|j| draws[(kk * 2 + t) * d + j] + c[j]).collect()).collect();
                    Draws::from_rows(d, &rows).unwrap()
                })
                .collect();
            SubposteriorSampleSet::new(ParamShape::Vector { d }, TemperingMode::Subposterior { k }, parts, vec![0; k]).unwrap()
        };
        let base = aggregate_linear(&w, &make(&[0.0, 0.0])).unwrap();
        let moved = aggregate_linear(&w, &make(&shift)).unwrap();
        for (a, b) in base.draws.rows().zip(moved.draws.rows()) {
            for j in 0..d {
                prop_assert!((a[j] + shift[j] - b[j]).abs() < 1e-9);
            }
        }
    }
}
