use super::{relaxed_entropy_grad, EntropyMode, SampleBatch};
use crate::aggregation::{WeightFamily, WeightSet};
use crate::error::{Error, Result};
use crate::exec::Backend;
use crate::models::{ProbitModel, SubposteriorMoments};
use crate::special::{norm_cdf, norm_pdf, LN_2PI};

const PHI_CLAMP: f64 = 1e-12;

fn check(model: &ProbitModel, moments: &SubposteriorMoments, weights: &WeightSet, batch: &SampleBatch) -> Result<()> {
    if weights.family() != WeightFamily::Vector {
        return Err(Error::config("the probit objective needs vector weights"));
    }
    let d = model.dim();
    Error::check_dim(d, weights.d())?;
    Error::check_dim(d, batch.dim())?;
    Error::check_dim(weights.k(), batch.k())?;
    Error::check_dim(weights.k(), moments.partitions())?;
    if batch.is_empty() {
        return Err(Error::config("empty sample batch"));
    }
    Ok(())
}

/// Value and gradient of the batch estimate of `E_q[log p(β, X)]`.
pub(crate) fn probit_terms(
    model: &ProbitModel,
    moments: &SubposteriorMoments,
    weights: &WeightSet,
    batch: &SampleBatch,
    backend: Backend,
) -> Result<(f64, Vec<f64>)> {
    check(model, moments, weights, batch)?;
    let (k, d) = (weights.k(), weights.d());
    let s2 = model.prior_var();

    // Prior: E‖β̂‖² = Σ_j [Σ_k w_kj² S_k,jj + Σ_{k≠l} w_kj w_lj μ_kj μ_lj].
    let mut grad = vec![0.0; k * d];
    let mut quad = 0.0;
    for j in 0..d {
        let m: f64 = (0..k).map(|kk| weights.get(kk, 0, j) * moments.means[kk][j]).sum();
        let mut diag = 0.0;
        let mut cross = m * m;
        for kk in 0..k {
            let w = weights.get(kk, 0, j);
            let mu = moments.means[kk][j];
            diag += w * w * moments.second[kk][(j, j)];
            cross -= w * w * mu * mu;
            grad[kk * d + j] = -(w * moments.second[kk][(j, j)] + mu * (m - w * mu)) / s2;
        }
        quad += diag + cross;
    }
    let mut value = -0.5 * d as f64 * (LN_2PI + s2.ln()) - 0.5 * quad / s2;

    let x = model.design();
    let y = model.labels();
    let per_draw = backend.map(batch.len(), |b| {
        let mut beta = vec![0.0; d];
        for kk in 0..k {
            for ((o, w), t) in beta.iter_mut().zip(weights.block(kk, 0)).zip(batch.draw(b, kk)) {
                *o += w * t;
            }
        }
        let mut lik = 0.0;
        let mut score = vec![0.0; d];
        let mut clamped = 0usize;
        for n in 0..model.len() {
            let z = model.predictor(n, &beta);
            let (p, q) = (norm_cdf(z), norm_cdf(-z));
            if p < PHI_CLAMP || q < PHI_CLAMP {
                clamped += 1;
            }
            let (p, q) = (p.clamp(PHI_CLAMP, 1.0 - PHI_CLAMP), q.clamp(PHI_CLAMP, 1.0 - PHI_CLAMP));
            let coef = if y[n] {
                lik += p.ln();
                norm_pdf(z) / p
            } else {
                lik += q.ln();
                -norm_pdf(z) / q
            };
            for (s, xv) in score.iter_mut().zip(x.row(n).iter()) {
                *s += coef * xv;
            }
        }
        let mut g = vec![0.0; k * d];
        for kk in 0..k {
            for (j, t) in batch.draw(b, kk).iter().enumerate() {
                g[kk * d + j] = score[j] * t;
            }
        }
        (lik, g, clamped)
    });
    let inv_b = 1.0 / batch.len() as f64;
    let mut clamped = 0;
    for (lik, g, c) in per_draw {
        value += inv_b * lik;
        for (o, v) in grad.iter_mut().zip(g) {
            *o += inv_b * v;
        }
        clamped += c;
    }
    if clamped > 0 {
        log::debug!("probit objective: Φ clamped for {clamped} predictor evaluations");
    }
    Ok((value, grad))
}

/// Batch estimate of `E_q[log p(β, X)]` for probit regression.
pub fn probit_objective(
    model: &ProbitModel,
    moments: &SubposteriorMoments,
    weights: &WeightSet,
    batch: &SampleBatch,
) -> Result<f64> {
    Ok(probit_terms(model, moments, weights, batch, Backend::default())?.0)
}

/// Gradient of the probit objective plus relaxed entropy.
pub fn grad_probit(
    model: &ProbitModel,
    moments: &SubposteriorMoments,
    weights: &WeightSet,
    batch: &SampleBatch,
    mode: EntropyMode,
) -> Result<Vec<f64>> {
    let (_, mut g) = probit_terms(model, moments, weights, batch, Backend::default())?;
    for (o, e) in g.iter_mut().zip(relaxed_entropy_grad(weights, mode)?) {
        *o += e;
    }
    Ok(g)
}
