use nalgebra::Cholesky;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::parallel::{ChainDiagnostics, ChainOutput};
use super::truncnorm::sample_signed;
use super::{DataPartition, SamplerConfig};
use crate::draws::Draws;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::models::{ProbitModel, TemperingMode};
use crate::rng::rng_from_seed;

/// Fixed pieces of the `β | z` conditional on one partition.
pub(crate) struct BetaConditional {
    chol: Cholesky<f64, nalgebra::Dyn>,
    l_t: Matrix,
}

impl BetaConditional {
    /// `Σ⁻¹ = prior_power σ⁻² I + X_kᵀX_k`.
    pub(crate) fn new(model: &ProbitModel, rows: &[usize], prior_power: f64) -> Result<Self> {
        let d = model.dim();
        let mut precision = linalg::gram_rows(model.design(), rows);
        for i in 0..d {
            precision[(i, i)] += prior_power / model.prior_var();
        }
        let chol = linalg::cholesky(&precision)?;
        let l_t = chol.l().transpose();
        Ok(BetaConditional { chol, l_t })
    }

    pub(crate) fn mean(&self, xtz: &Vector) -> Vector {
        self.chol.solve(xtz)
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, xtz: &Vector, rng: &mut R) -> Vector {
        let d = xtz.len();
        let eps = Vector::from_fn(d, |_, _| StandardNormal.sample(rng));
        let noise = self
            .l_t
            .solve_upper_triangular(&eps)
            .expect("Cholesky factor has a positive diagonal");
        self.mean(xtz) + noise
    }
}

/// Mean of `β | z`, i.e. `ΣXᵀz`, on the given partition.
pub fn probit_conditional_beta(
    model: &ProbitModel,
    partition: &DataPartition,
    mode: TemperingMode,
    z: &[f64],
) -> Result<Vec<f64>> {
    Error::check_dim(partition.len(), z.len())?;
    let cond = BetaConditional::new(model, partition.rows(), mode.prior_power())?;
    let xtz = xt_z(model, partition.rows(), z);
    Ok(cond.mean(&xtz).iter().copied().collect())
}

fn xt_z(model: &ProbitModel, rows: &[usize], z: &[f64]) -> Vector {
    let x = model.design();
    let mut out = Vector::zeros(model.dim());
    for (&n, &zn) in rows.iter().zip(z) {
        for j in 0..model.dim() {
            out[j] += x[(n, j)] * zn;
        }
    }
    out
}

/// Data-augmented Gibbs sampler for probit regression on one partition.
///
/// Alternates `zₙ | β` (unit-variance normal truncated by the sign of `yₙ`)
/// and `β | z ~ N(ΣXᵀz, Σ)`. The chain starts at the prior mean `β = 0`.
pub fn gibbs_probit(
    model: &ProbitModel,
    partition: &DataPartition,
    mode: TemperingMode,
    cfg: &SamplerConfig,
    seed: u64,
) -> Result<ChainOutput> {
    cfg.validate()?;
    mode.validate()?;
    let rows = partition.rows();
    crate::models::check_rows(Some(rows), model.len())?;
    let cond = BetaConditional::new(model, rows, mode.prior_power())?;
    let mut rng = rng_from_seed(seed);
    let d = model.dim();
    let mut beta = vec![0.0; d];
    let mut z = vec![0.0; rows.len()];
    let mut draws = Draws::with_capacity(d, cfg.draw_count());
    let labels = model.labels();
    for it in 0..cfg.iterations {
        for (zn, &n) in z.iter_mut().zip(rows) {
            *zn = sample_signed(model.predictor(n, &beta), labels[n], &mut rng);
        }
        let xtz = xt_z(model, rows, &z);
        let next = cond.draw(&xtz, &mut rng);
        beta.iter_mut().zip(next.iter()).for_each(|(b, v)| *b = *v);
        if cfg.keeps(it) {
            draws.push(&beta)?;
        }
    }
    Ok(ChainOutput {
        draws,
        diagnostics: ChainDiagnostics::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn quick_cfg() -> SamplerConfig {
        SamplerConfig {
            iterations: 600,
            burn_in: 100,
            thin: 1,
            ..Default::default()
        }
    }

    #[test]
    fn separated_data_gives_positive_slope() {
        let x = Matrix::from_element(10, 1, 1.0);
        let model = ProbitModel::new(x, vec![true; 10], 1.0).unwrap();
        let part = DataPartition::full(10);
        for seed in 0..100 {
            let out = gibbs_probit(&model, &part, TemperingMode::Subposterior { k: 1 }, &quick_cfg(), seed).unwrap();
            assert!(out.draws.mean()[0] > 0.0, "seed {seed}");
        }
    }

    #[test]
    fn rejects_bad_config() {
        let model = ProbitModel::new(Matrix::from_element(2, 1, 1.0), vec![true, false], 1.0).unwrap();
        let cfg = SamplerConfig { iterations: 5, burn_in: 5, ..Default::default() };
        assert!(gibbs_probit(&model, &DataPartition::full(2), TemperingMode::PartialPosterior, &cfg, 0).is_err());
    }

    #[test]
    fn beta_conditional_mean_is_consistent() {
        let mut rng = rng_from_seed(12);
        let x = Matrix::from_fn(8, 2, |_, _| rng.random_range(-1.0..1.0));
        let model = ProbitModel::new(x, vec![true; 8], 2.0).unwrap();
        let part = DataPartition::full(8);
        let z: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..2.0)).collect();
        let mode = TemperingMode::Subposterior { k: 3 };
        let expect = probit_conditional_beta(&model, &part, mode, &z).unwrap();
        let cond = BetaConditional::new(&model, part.rows(), mode.prior_power()).unwrap();
        let xtz = xt_z(&model, part.rows(), &z);
        let n = 100_000;
        let mut sum = [0.0; 2];
        let mut sq = [0.0; 2];
        for _ in 0..n {
            let b = cond.draw(&xtz, &mut rng);
            for j in 0..2 {
                sum[j] += b[j];
                sq[j] += b[j] * b[j];
            }
        }
        for j in 0..2 {
            let m = sum[j] / n as f64;
            let se = ((sq[j] / n as f64 - m * m) / n as f64).sqrt();
            assert!((m - expect[j]).abs() < 3.0 * se, "coord {j}: {m} vs {}", expect[j]);
        }
    }
}
