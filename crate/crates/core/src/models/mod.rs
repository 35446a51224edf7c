//! The three Bayesian models and their (tempered) log densities.
//!
//! Normalizing constants:
//! * probit – the Gaussian prior normalizer is included; the likelihood is
//!   exact (the augmented `Z` integrates out in closed form to `Φ`).
//! * normal/Wishart – the Wishart normalizer and the Gaussian likelihood
//!   normalizer are both included.
//! * mixture – Gaussian normalizers are included and the assignments `Zₙ`
//!   are marginalized with log-sum-exp.
//!
//! For every model `log_joint(θ) = Σ_k partition_log_density(θ, k)` exactly
//! when the partitions are a disjoint cover and the mode is `Subposterior(K)`.

mod data;
mod mixture;
mod moments;
mod niw;
mod probit;

pub use data::{
    load_csv, MixtureGenerator, NiwGenerator, ProbitDesign, ProbitGenerator, SyntheticMixture,
};
pub use mixture::MixtureModel;
pub use moments::{compute_moments, SubposteriorMoments};
pub use niw::NiwModel;
pub use probit::ProbitModel;

use serde::{Deserialize, Serialize};

use crate::draws::ParamShape;
use crate::error::{Error, Result};
use crate::samplers::DataPartition;

/// How the prior is shared between partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TemperingMode {
    /// Prior raised to `1/k` on every partition.
    Subposterior { k: usize },
    /// Full prior on every partition.
    PartialPosterior,
}

impl TemperingMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TemperingMode::Subposterior { k: 0 } => Err(Error::config("tempering needs K >= 1")),
            _ => Ok(()),
        }
    }

    /// Exponent applied to the log prior.
    pub fn prior_power(&self) -> f64 {
        match *self {
            TemperingMode::Subposterior { k } => 1.0 / k as f64,
            TemperingMode::PartialPosterior => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTag {
    Probit,
    NormalInverseWishart,
    GaussianMixture,
}

impl ModelTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelTag::Probit => "probit",
            ModelTag::NormalInverseWishart => "niw",
            ModelTag::GaussianMixture => "mixture",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "probit" => Ok(ModelTag::Probit),
            "niw" | "normal_inverse_wishart" => Ok(ModelTag::NormalInverseWishart),
            "mixture" | "gaussian_mixture" => Ok(ModelTag::GaussianMixture),
            other => Err(Error::Format(format!("unknown model tag `{other}`"))),
        }
    }
}

/// One of the three supported models together with its data.
#[derive(Debug, Clone)]
pub enum ModelSpec {
    Probit(ProbitModel),
    NormalInverseWishart(NiwModel),
    GaussianMixture(MixtureModel),
}

impl ModelSpec {
    pub fn tag(&self) -> ModelTag {
        match self {
            ModelSpec::Probit(_) => ModelTag::Probit,
            ModelSpec::NormalInverseWishart(_) => ModelTag::NormalInverseWishart,
            ModelSpec::GaussianMixture(_) => ModelTag::GaussianMixture,
        }
    }

    pub fn shape(&self) -> ParamShape {
        match self {
            ModelSpec::Probit(m) => ParamShape::Vector { d: m.dim() },
            ModelSpec::NormalInverseWishart(m) => ParamShape::SymMatrix { d: m.dim() },
            ModelSpec::GaussianMixture(m) => ParamShape::Clusters {
                l: m.clusters(),
                d: m.dim(),
            },
        }
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        match self {
            ModelSpec::Probit(m) => m.len(),
            ModelSpec::NormalInverseWishart(m) => m.len(),
            ModelSpec::GaussianMixture(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn log_prior(&self, theta: &[f64]) -> Result<f64> {
        match self {
            ModelSpec::Probit(m) => m.log_prior(theta),
            ModelSpec::NormalInverseWishart(m) => m.log_prior(theta),
            ModelSpec::GaussianMixture(m) => m.log_prior(theta),
        }
    }

    /// Log likelihood of the selected rows, or of all rows for `None`.
    pub fn log_likelihood(&self, theta: &[f64], rows: Option<&[usize]>) -> Result<f64> {
        match self {
            ModelSpec::Probit(m) => m.log_likelihood(theta, rows),
            ModelSpec::NormalInverseWishart(m) => m.log_likelihood(theta, rows),
            ModelSpec::GaussianMixture(m) => m.log_likelihood(theta, rows),
        }
    }
}

/// `log p(θ) + Σₙ log p(xₙ | θ)`.
pub fn log_joint(model: &ModelSpec, theta: &[f64]) -> Result<f64> {
    Ok(model.log_prior(theta)? + model.log_likelihood(theta, None)?)
}

/// Log density targeted on one partition: the partition likelihood plus the
/// prior raised to the mode's power.
pub fn partition_log_density(
    model: &ModelSpec,
    partition: &DataPartition,
    theta: &[f64],
    mode: TemperingMode,
) -> Result<f64> {
    mode.validate()?;
    let lik = model.log_likelihood(theta, Some(partition.rows()))?;
    Ok(lik + mode.prior_power() * model.log_prior(theta)?)
}

pub(crate) fn check_rows(rows: Option<&[usize]>, n: usize) -> Result<()> {
    if let Some(rows) = rows {
        if let Some(&bad) = rows.iter().find(|&&r| r >= n) {
            return Err(Error::Dimension { expected: n, got: bad });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::samplers::partition_data;
    use rand::Rng;

    fn probit_fixture(n: usize, d: usize, seed: u64) -> ModelSpec {
        let mut rng = crate::rng::rng_from_seed(seed);
        let x = Matrix::from_fn(n, d, |_, _| rng.random_range(-2.0..2.0));
        let y = (0..n).map(|_| rng.random_bool(0.5)).collect();
        ModelSpec::Probit(ProbitModel::new(x, y, 2.0).unwrap())
    }

    fn mixture_fixture(n: usize, seed: u64) -> ModelSpec {
        let mut rng = crate::rng::rng_from_seed(seed);
        let x = Matrix::from_fn(n, 2, |_, _| rng.random_range(-3.0..3.0));
        ModelSpec::GaussianMixture(MixtureModel::new(3, 4.0, 1.0, vec![1.0 / 3.0; 3], x).unwrap())
    }

    fn niw_fixture(n: usize, seed: u64) -> ModelSpec {
        let mut rng = crate::rng::rng_from_seed(seed);
        let x = Matrix::from_fn(n, 2, |_, _| rng.random_range(-1.0..1.0));
        ModelSpec::NormalInverseWishart(NiwModel::new(4.0, Matrix::identity(2, 2), None, x).unwrap())
    }

    #[test]
    fn probit_prior_only_at_origin() {
        let m = ProbitModel::new(Matrix::zeros(0, 1), vec![], 1.0).unwrap();
        let lj = log_joint(&ModelSpec::Probit(m), &[0.0]).unwrap();
        assert!((lj + 0.5 * crate::special::LN_2PI).abs() < 1e-15);
    }

    #[test]
    fn single_cluster_mixture_matches_hand_sum() {
        let x = Matrix::from_row_slice(2, 1, &[0.5, -1.5]);
        let (tau2, sigma2) = (4.0, 0.25);
        let m = ModelSpec::GaussianMixture(MixtureModel::new(1, tau2, sigma2, vec![1.0], x).unwrap());
        let th = 0.3_f64;
        let ln_n = |x: f64, m: f64, v: f64| -0.5 * (2.0 * std::f64::consts::PI * v).ln() - (x - m).powi(2) / (2.0 * v);
        let expect = ln_n(th, 0.0, tau2) + ln_n(0.5, th, sigma2) + ln_n(-1.5, th, sigma2);
        assert!((log_joint(&m, &[th]).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn wishart_at_identity_closed_form() {
        // log W(I; ν=3, V=I) for d=2: −tr/2 − νd/2 ln2 − ln Γ₂(3/2)
        let m = NiwModel::new(3.0, Matrix::identity(2, 2), Some(vec![0.0, 0.0]), Matrix::zeros(0, 2)).unwrap();
        let got = log_joint(&ModelSpec::NormalInverseWishart(m), &[1.0, 0.0, 0.0, 1.0]).unwrap();
        // Γ₂(3/2) = π^{1/2} Γ(3/2) Γ(1) = π/2
        let expect = -1.0 - 3.0 * std::f64::consts::LN_2 - (std::f64::consts::PI / 2.0).ln();
        assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
    }

    #[test]
    fn niw_rejects_indefinite_precision() {
        let m = niw_fixture(5, 1);
        assert!(matches!(log_joint(&m, &[1.0, 2.0, 2.0, 1.0]), Err(Error::Domain(_))));
        assert!(matches!(log_joint(&m, &[1.0, 0.0, 0.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn k1_partition_equals_log_joint() {
        let m = probit_fixture(30, 3, 5);
        let parts = partition_data(30, 1, 9).unwrap();
        let theta = [0.2, -0.4, 1.0];
        let a = partition_log_density(&m, &parts[0], &theta, TemperingMode::Subposterior { k: 1 }).unwrap();
        assert!((a - log_joint(&m, &theta).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn empty_partition_gives_scaled_prior() {
        let m = probit_fixture(10, 2, 1);
        let empty = DataPartition::new(0, vec![]);
        let theta = [0.7, -0.1];
        let prior = m.log_prior(&theta).unwrap();
        let sub = partition_log_density(&m, &empty, &theta, TemperingMode::Subposterior { k: 2 }).unwrap();
        assert!((sub - 0.5 * prior).abs() < 1e-15);
        let partial = partition_log_density(&m, &empty, &theta, TemperingMode::PartialPosterior).unwrap();
        assert!((partial - prior).abs() < 1e-15);
    }

    #[test]
    fn factorization_holds_for_random_models() {
        let mut rng = crate::rng::rng_from_seed(77);
        for case in 0..50u64 {
            let k = rng.random_range(1..6);
            let n = rng.random_range(k..40);
            let (model, theta): (ModelSpec, Vec<f64>) = match case % 3 {
                0 => (probit_fixture(n, 3, case), (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()),
                1 => (mixture_fixture(n, case), (0..6).map(|_| rng.random_range(-2.0..2.0)).collect()),
                _ => {
                    let a = rng.random_range(0.5..2.0);
                    let b = rng.random_range(-0.3..0.3);
                    (niw_fixture(n, case), vec![a, b, b, 1.0])
                }
            };
            let parts = partition_data(n, k, case).unwrap();
            let mode = TemperingMode::Subposterior { k };
            let total: f64 = parts
                .iter()
                .map(|p| partition_log_density(&model, p, &theta, mode).unwrap())
                .sum();
            let lj = log_joint(&model, &theta).unwrap();
            assert!((total - lj).abs() < 1e-9 * lj.abs().max(1.0), "case {case}: {total} vs {lj}");
        }
    }

    #[test]
    fn log_joint_invariant_to_row_order() {
        let m = probit_fixture(25, 3, 3);
        let ModelSpec::Probit(p) = &m else { unreachable!() };
        let mut order: Vec<usize> = (0..25).collect();
        order.reverse();
        let permuted = ModelSpec::Probit(p.select_rows(&order));
        let theta = [0.3, 0.1, -0.8];
        let a = log_joint(&m, &theta).unwrap();
        let b = log_joint(&permuted, &theta).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn mixture_invariant_to_label_permutation() {
        let m = mixture_fixture(20, 4);
        let theta = [1.0, 0.0, -1.0, 2.0, 0.5, -0.5];
        let swapped = [0.5, -0.5, 1.0, 0.0, -1.0, 2.0];
        let a = log_joint(&m, &theta).unwrap();
        let b = log_joint(&m, &swapped).unwrap();
        assert!((a - b).abs() < 1e-10);
    }
}
