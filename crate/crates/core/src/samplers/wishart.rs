//! Exact conjugate draws of the normal/Wishart precision.
//!
//! Tempering a `Wishart(ν, V)` prior to the power `p` gives
//! `|Λ|^{p(ν-d-1)/2} exp(-tr((V/p)⁻¹Λ)/2)`, which is again Wishart with
//! `ν' = p(ν-d-1) + d + 1` and `V' = V/p` (so `K·V` for subposteriors).

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use super::parallel::{ChainDiagnostics, ChainOutput};
use super::{DataPartition, SamplerConfig};
use crate::draws::Draws;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::models::{NiwModel, TemperingMode};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct WishartParams {
    pub dof: f64,
    pub scale: Matrix,
}

/// The prior raised to the mode's power.
pub fn tempered_wishart_prior(model: &NiwModel, mode: TemperingMode) -> WishartParams {
    let p = mode.prior_power();
    let d = model.dim() as f64;
    WishartParams {
        dof: p * (model.dof() - d - 1.0) + d + 1.0,
        scale: model.scale() / p,
    }
}

/// Bartlett construction: `Λ = (LA)(LA)ᵀ` with `LLᵀ = V`, `A` lower
/// triangular, `A_ii² ~ χ²(ν-i)` and standard normal below the diagonal.
pub fn sample_wishart<R: Rng + ?Sized>(params: &WishartParams, chol_l: &Matrix, rng: &mut R) -> Result<Matrix> {
    let d = params.scale.nrows();
    let mut a = Matrix::zeros(d, d);
    for i in 0..d {
        let chi = ChiSquared::new(params.dof - i as f64)
            .map_err(|e| Error::domain(format!("Wishart degrees of freedom: {e}")))?;
        a[(i, i)] = chi.sample(rng).sqrt();
        for j in 0..i {
            a[(i, j)] = StandardNormal.sample(rng);
        }
    }
    let la = chol_l * a;
    Ok(linalg::symmetrize(&(&la * la.transpose())))
}

/// Independent posterior draws of `Λ` given the partition's data.
pub fn sample_niw_precision(
    model: &NiwModel,
    partition: &DataPartition,
    mode: TemperingMode,
    cfg: &SamplerConfig,
    seed: u64,
) -> Result<ChainOutput> {
    cfg.validate()?;
    mode.validate()?;
    let rows = partition.rows();
    crate::models::check_rows(Some(rows), model.len())?;
    let prior = tempered_wishart_prior(model, mode);
    let d = model.dim();
    let dof = prior.dof + rows.len() as f64;
    if !(dof > d as f64 - 1.0) {
        return Err(Error::domain(format!("posterior degrees of freedom {dof} must exceed d-1")));
    }
    let scale_inv = model.scale_inv() * mode.prior_power() + model.scatter(Some(rows));
    let scale = linalg::symmetrize(&linalg::inverse_pd(&scale_inv)?);
    let chol_l = linalg::cholesky(&scale)?.l();
    let post = WishartParams { dof, scale };
    let mut rng = rng_from_seed(seed);
    let t = cfg.draw_count();
    let mut draws = Draws::with_capacity(d * d, t);
    for _ in 0..t {
        let lambda = sample_wishart(&post, &chol_l, &mut rng)?;
        draws.push(&linalg::matrix_to_flat(&lambda))?;
    }
    Ok(ChainOutput {
        draws,
        diagnostics: ChainDiagnostics::default(),
    })
}
