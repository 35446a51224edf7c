//! Analytic objective gradients against central finite differences.

use rand::seq::SliceRandom;
use rand::Rng;
use vcmc::aggregation::{Alignment, WeightFamily, WeightSet};
use vcmc::linalg::Matrix;
use vcmc::models::{MixtureModel, NiwModel, ProbitModel, SubposteriorMoments};
use vcmc::rng::{rng_from_seed, Rng as ChaRng};
use vcmc::variational::{EntropyMode, MogGradient, Objective, SampleBatch};
use vcmc::Draws;

const H: f64 = 1e-5;

fn fd_relative_error(objective: &Objective<'_>, weights: &WeightSet, batch: &SampleBatch) -> f64 {
    let (_, g) = objective.value_and_grad(weights, batch).unwrap();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..g.len() {
        let mut plus = weights.values().to_vec();
        let mut minus = plus.clone();
        plus[i] += H;
        minus[i] -= H;
        let fp = objective.value(&weights.with_values(plus).unwrap(), batch).unwrap();
        let fm = objective.value(&weights.with_values(minus).unwrap(), batch).unwrap();
        let fd = (fp - fm) / (2.0 * H);
        num += (g[i] - fd).powi(2);
        den += fd * fd;
    }
    (num / den.max(1e-300)).sqrt()
}

fn random_weights(rng: &mut ChaRng, family: WeightFamily, k: usize, l: usize, d: usize, alignment: Option<Alignment>) -> WeightSet {
    let values = (0..k * l * d).map(|_| rng.random_range(0.2..1.0)).collect();
    WeightSet::unchecked(family, k, l, d, values, alignment).unwrap()
}

fn gaussian(rng: &mut ChaRng) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}

#[test]
fn probit_gradient_matches_finite_differences() {
    let mut rng = rng_from_seed(101);
    for _ in 0..20 {
        let d = rng.random_range(1..=4);
        let k = rng.random_range(1..=3);
        let n = rng.random_range(0..=20);
        let x = Matrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0));
        let y = (0..n).map(|_| rng.random_bool(0.5)).collect();
        let model = ProbitModel::new(x, y, rng.random_range(0.5..3.0)).unwrap();
        let parts: Vec<Draws> = (0..k)
            .map(|_| {
                let rows: Vec<Vec<f64>> = (0..30).map(|_| (0..d).map(|_| 0.3 + 0.5 * gaussian(&mut rng)).collect()).collect();
                Draws::from_rows(d, &rows).unwrap()
            })
            .collect();
        let moments = SubposteriorMoments::from_draws(&parts).unwrap();
        let mut data = Vec::new();
        for b in 0..8 {
            for p in &parts {
                data.extend_from_slice(p.row(b));
            }
        }
        let batch = SampleBatch::new(k, d, data).unwrap();
        let w = random_weights(&mut rng, WeightFamily::Vector, k, 1, d, None);
        let obj = Objective::probit(&model, moments, EntropyMode::RelaxedMean);
        let err = fd_relative_error(&obj, &w, &batch);
        assert!(err < 1e-4, "probit relative error {err}");
    }
}

fn random_pd(rng: &mut ChaRng, d: usize) -> Vec<f64> {
    let b = Matrix::from_fn(d, d, |_, _| gaussian(rng));
    let m = &b * b.transpose() + Matrix::identity(d, d) * 0.5;
    vcmc::linalg::matrix_to_flat(&m)
}

#[test]
fn niw_gradient_matches_finite_differences() {
    let mut rng = rng_from_seed(202);
    for _ in 0..20 {
        let d = rng.random_range(1..=4);
        let k = rng.random_range(1..=3);
        let n = rng.random_range(0..=20);
        let x = Matrix::from_fn(n, d, |_, _| gaussian(&mut rng));
        let model = NiwModel::new(d as f64 + 2.0, Matrix::identity(d, d), None, x).unwrap();
        let mut data = Vec::new();
        for _ in 0..6 * k {
            data.extend(random_pd(&mut rng, d));
        }
        let batch = SampleBatch::new(k, d * d, data).unwrap();
        let w = random_weights(&mut rng, WeightFamily::Spectral, k, 1, d, None);
        let obj = Objective::niw(&model, EntropyMode::RelaxedMean);
        let err = fd_relative_error(&obj, &w, &batch);
        assert!(err < 1e-4, "niw relative error {err}");
    }
}

struct MixtureInstance {
    model: MixtureModel,
    weights: WeightSet,
    batch: SampleBatch,
    l: usize,
}

fn mixture_instance(rng: &mut ChaRng) -> MixtureInstance {
    let l = rng.random_range(1..=3);
    let d = rng.random_range(1..=2);
    let k = rng.random_range(1..=3);
    let n = rng.random_range(1..=20);
    let x = Matrix::from_fn(n, d, |_, _| 1.5 * gaussian(rng));
    let model = MixtureModel::new(l, 4.0, rng.random_range(0.5..2.0), vec![1.0 / l as f64; l], x).unwrap();
    let mut perms = vec![(0..l).collect::<Vec<_>>()];
    for _ in 1..k {
        let mut p: Vec<usize> = (0..l).collect();
        p.shuffle(rng);
        perms.push(p);
    }
    let alignment = Alignment::new(perms).unwrap();
    let data = (0..5 * k * l * d).map(|_| 1.5 * gaussian(rng)).collect();
    let batch = SampleBatch::new(k, l * d, data).unwrap();
    let weights = random_weights(rng, WeightFamily::Combinatorial, k, l, d, Some(alignment));
    MixtureInstance { model, weights, batch, l }
}

#[test]
fn mixture_gradient_matches_finite_differences() {
    let mut rng = rng_from_seed(303);
    for _ in 0..20 {
        let inst = mixture_instance(&mut rng);
        let obj = Objective::mixture(&inst.model, EntropyMode::RelaxedMean, MogGradient::Exact);
        let err = fd_relative_error(&obj, &inst.weights, &inst.batch);
        assert!(err < 1e-4, "mixture relative error {err}");
    }
}

#[test]
fn printed_mixture_gradient_is_exact_only_for_one_cluster() {
    let mut rng = rng_from_seed(404);
    let mut worst_multi: f64 = 0.0;
    let mut worst_single: f64 = 0.0;
    for _ in 0..40 {
        let inst = mixture_instance(&mut rng);
        let obj = Objective::mixture(&inst.model, EntropyMode::RelaxedMean, MogGradient::Printed);
        let err = fd_relative_error(&obj, &inst.weights, &inst.batch);
        if inst.l == 1 {
            worst_single = worst_single.max(err);
        } else {
            worst_multi = worst_multi.max(err);
        }
    }
    assert!(worst_single < 1e-4, "{worst_single}");
    assert!(worst_multi > 1e-3, "{worst_multi}");
}

#[test]
fn max_entropy_gradient_matches_away_from_ties() {
    let mut rng = rng_from_seed(505);
    let d = 3;
    let model = ProbitModel::new(Matrix::from_fn(10, d, |_, _| rng.random_range(-1.0..1.0)), vec![true; 10], 1.0).unwrap();
    let parts: Vec<Draws> = (0..2)
        .map(|_| Draws::from_rows(d, &(0..10).map(|_| vec![gaussian(&mut rng); d]).collect::<Vec<_>>()).unwrap())
        .collect();
    let moments = SubposteriorMoments::from_draws(&parts).unwrap();
    let batch = SampleBatch::new(2, d, parts.iter().flat_map(|p| p.row(0).to_vec()).collect()).unwrap();
    let w = WeightSet::unchecked(WeightFamily::Vector, 2, 1, d, vec![0.8, 0.7, 0.9, 0.2, 0.3, 0.1], None).unwrap();
    let obj = Objective::probit(&model, moments, EntropyMode::RelaxedMax);
    assert!(fd_relative_error(&obj, &w, &batch) < 1e-4);
}
