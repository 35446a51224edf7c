use super::{relaxed_entropy_grad, EntropyMode, MogGradient, SampleBatch};
use crate::aggregation::{WeightFamily, WeightSet};
use crate::error::{Error, Result};
use crate::exec::Backend;
use crate::models::MixtureModel;
use crate::special::softmax_in_place;

fn check(model: &MixtureModel, weights: &WeightSet, batch: &SampleBatch) -> Result<()> {
    if weights.family() != WeightFamily::Combinatorial {
        return Err(Error::config("the mixture objective needs combinatorial weights"));
    }
    Error::check_dim(model.clusters(), weights.l())?;
    Error::check_dim(model.dim(), weights.d())?;
    Error::check_dim(model.clusters() * model.dim(), batch.dim())?;
    Error::check_dim(weights.k(), batch.k())?;
    if batch.is_empty() {
        return Err(Error::config("empty sample batch"));
    }
    Ok(())
}

pub(crate) fn mog_terms(
    model: &MixtureModel,
    weights: &WeightSet,
    batch: &SampleBatch,
    kind: MogGradient,
    backend: Backend,
) -> Result<(f64, Vec<f64>)> {
    check(model, weights, batch)?;
    let (k, l, d) = (weights.k(), weights.l(), weights.d());
    let alignment = weights.alignment().expect("combinatorial weights carry an alignment");
    let (tau2, sigma2) = (model.prior_var(), model.lik_var());
    let x = model.data();
    let per_draw = backend.map(batch.len(), |b| {
        let mut star = vec![0.0; l * d];
        for kk in 0..k {
            let theta = batch.draw(b, kk);
            for (g, &m) in alignment.perm(kk).iter().enumerate() {
                for (j, w) in weights.block(kk, g).iter().enumerate() {
                    star[g * d + j] += w * theta[m * d + j];
                }
            }
        }
        let mut value = -0.5 * star.iter().map(|t| t * t).sum::<f64>() / tau2;
        let mut big_g: Vec<f64> = star.iter().map(|t| -t / tau2).collect();
        let mut e = vec![0.0; l];
        let mut gamma = vec![0.0; l];
        for n in 0..model.len() {
            let xn = x.row(n);
            for g in 0..l {
                e[g] = (0..d).map(|j| (star[g * d + j] - xn[j]).powi(2)).sum();
                gamma[g] = -0.5 * e[g] / sigma2 + model.log_weights()[g];
            }
            softmax_in_place(&mut gamma);
            let e_bar: f64 = gamma.iter().zip(&e).map(|(a, b)| a * b).sum();
            value -= 0.5 * e_bar / sigma2;
            for g in 0..l {
                let curv = match kind {
                    MogGradient::Exact => gamma[g] * (e[g] - e_bar),
                    MogGradient::Printed => gamma[g] * (1.0 - gamma[g]) * e[g],
                };
                let coef = -gamma[g] / sigma2 + 0.5 * curv / (sigma2 * sigma2);
                for j in 0..d {
                    big_g[g * d + j] += coef * (star[g * d + j] - xn[j]);
                }
            }
        }
        let mut grad = vec![0.0; k * l * d];
        for kk in 0..k {
            let theta = batch.draw(b, kk);
            for (g, &m) in alignment.perm(kk).iter().enumerate() {
                for j in 0..d {
                    grad[(kk * l + g) * d + j] = big_g[g * d + j] * theta[m * d + j];
                }
            }
        }
        (value, grad)
    });
    let inv_b = 1.0 / batch.len() as f64;
    let mut value = 0.0;
    let mut grad = vec![0.0; k * l * d];
    for (v, g) in per_draw {
        value += inv_b * v;
        for (o, x) in grad.iter_mut().zip(g) {
            *o += inv_b * x;
        }
    }
    Ok((value, grad))
}

/// Batch estimate of the mixture bound
/// `−‖θ*‖²/(2τ²) − Σₙ Σ_ℓ γ_{nℓ} ‖θ*_ℓ − xₙ‖²/(2σ²)`.
pub fn mog_objective(model: &MixtureModel, weights: &WeightSet, batch: &SampleBatch) -> Result<f64> {
    Ok(mog_terms(model, weights, batch, MogGradient::Exact, Backend::default())?.0)
}

fn with_entropy(model: &MixtureModel, weights: &WeightSet, batch: &SampleBatch, mode: EntropyMode, kind: MogGradient) -> Result<Vec<f64>> {
    let (_, mut g) = mog_terms(model, weights, batch, kind, Backend::default())?;
    for (o, e) in g.iter_mut().zip(relaxed_entropy_grad(weights, mode)?) {
        *o += e;
    }
    Ok(g)
}

/// Exact gradient of the mixture bound plus relaxed entropy.
pub fn grad_mog(model: &MixtureModel, weights: &WeightSet, batch: &SampleBatch, mode: EntropyMode) -> Result<Vec<f64>> {
    with_entropy(model, weights, batch, mode, MogGradient::Exact)
}

/// Variant whose responsibility curvature term is `γ(1−γ)e_{nℓ}` instead of
/// `γ(e_{nℓ} − Σ_m γ_m e_{nm})`. It coincides with [`grad_mog`] for a single
/// cluster and drops the cross-cluster softmax terms otherwise.
pub fn grad_mog_printed(model: &MixtureModel, weights: &WeightSet, batch: &SampleBatch, mode: EntropyMode) -> Result<Vec<f64>> {
    with_entropy(model, weights, batch, mode, MogGradient::Printed)
}
