use super::{relaxed_entropy_grad, EntropyMode, SampleBatch};
use crate::aggregation::{canonical_eigendecomposition, reconstruct, WeightFamily, WeightSet};
use crate::error::{Error, Result};
use crate::exec::Backend;
use crate::linalg::{self, Matrix};
use crate::models::NiwModel;
use crate::special::LN_2PI;

/// Data summaries entering the normal/Wishart objective:
/// `E_q[log p] = c − ½ tr(A Λ̂) + coef · ln det Λ̂`.
#[derive(Debug, Clone)]
pub struct NiwSummary {
    /// `V⁻¹ + Σₙ (xₙ−μ)(xₙ−μ)ᵀ`.
    pub a: Matrix,
    /// `(ν + N − d − 1)/2`.
    pub coef: f64,
    pub constant: f64,
}

impl NiwSummary {
    pub fn new(model: &NiwModel) -> Self {
        let (d, n) = (model.dim() as f64, model.len() as f64);
        NiwSummary {
            a: model.scale_inv() + model.scatter(None),
            coef: 0.5 * (model.dof() + n - d - 1.0),
            constant: model.log_normalizer() - 0.5 * n * d * LN_2PI,
        }
    }
}

fn check(summary: &NiwSummary, weights: &WeightSet, batch: &SampleBatch) -> Result<()> {
    if weights.family() != WeightFamily::Spectral {
        return Err(Error::config("the normal/Wishart objective needs spectral weights"));
    }
    let d = summary.a.nrows();
    Error::check_dim(d, weights.d())?;
    Error::check_dim(d * d, batch.dim())?;
    Error::check_dim(weights.k(), batch.k())?;
    if batch.is_empty() {
        return Err(Error::config("empty sample batch"));
    }
    Ok(())
}

pub(crate) fn niw_terms(
    summary: &NiwSummary,
    weights: &WeightSet,
    batch: &SampleBatch,
    backend: Backend,
) -> Result<(f64, Vec<f64>)> {
    check(summary, weights, batch)?;
    let (k, d) = (weights.k(), weights.d());
    let a = &summary.a;
    let per_draw = backend.try_map(batch.len(), |b| -> Result<(f64, Vec<f64>)> {
        let mut lambda = Matrix::zeros(d, d);
        let mut parts = Vec::with_capacity(k);
        for kk in 0..k {
            let m = linalg::matrix_from_flat(d, batch.draw(b, kk))?;
            let (r, vals) = canonical_eigendecomposition(&m)?;
            let scaled: Vec<f64> = vals.iter().zip(weights.block(kk, 0)).map(|(v, w)| v * w).collect();
            lambda += reconstruct(&r, &scaled);
            parts.push((r, vals));
        }
        let lambda = linalg::symmetrize(&lambda);
        let chol = linalg::cholesky(&lambda).map_err(|_| {
            Error::domain(format!(
                "aggregated precision is singular (condition number {:e})",
                linalg::condition_number(&lambda)
            ))
        })?;
        let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|x| x.ln()).sum::<f64>();
        let inv = chol.inverse();
        let value = summary.constant - 0.5 * (a * &lambda).trace() + summary.coef * log_det;
        let mut g = vec![0.0; k * d];
        for (kk, (r, vals)) in parts.iter().enumerate() {
            let ra = r * a * r.transpose();
            let ri = r * &inv * r.transpose();
            for j in 0..d {
                g[kk * d + j] = vals[j] * (-0.5 * ra[(j, j)] + summary.coef * ri[(j, j)]);
            }
        }
        Ok((value, g))
    })?;
    let inv_b = 1.0 / batch.len() as f64;
    let mut value = 0.0;
    let mut grad = vec![0.0; k * d];
    for (v, g) in per_draw {
        value += inv_b * v;
        for (o, x) in grad.iter_mut().zip(g) {
            *o += inv_b * x;
        }
    }
    Ok((value, grad))
}

/// Batch estimate of `E_q[log p(Λ̂, X)]` under spectral aggregation.
pub fn niw_objective(summary: &NiwSummary, weights: &WeightSet, batch: &SampleBatch) -> Result<f64> {
    Ok(niw_terms(summary, weights, batch, Backend::default())?.0)
}

/// Gradient of the normal/Wishart objective plus relaxed entropy.
pub fn grad_niw(summary: &NiwSummary, weights: &WeightSet, batch: &SampleBatch, mode: EntropyMode) -> Result<Vec<f64>> {
    let (_, mut g) = niw_terms(summary, weights, batch, Backend::default())?;
    for (o, e) in g.iter_mut().zip(relaxed_entropy_grad(weights, mode)?) {
        *o += e;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::uniform_weights;
    use crate::models::{log_joint, ModelSpec};
    use crate::ParamShape;

    #[test]
    fn scalar_log_det_gradient() {
        let model = NiwModel::new(5.0, Matrix::identity(1, 1), Some(vec![0.0]), Matrix::zeros(0, 1)).unwrap();
        let s = NiwSummary::new(&model);
        let w = uniform_weights(1, ParamShape::SymMatrix { d: 1 }).unwrap();
        let batch = SampleBatch::new(1, 1, vec![2.0]).unwrap();
        let g = grad_niw(&s, &w, &batch, EntropyMode::RelaxedMean).unwrap();
        // D·(−½·A + coef/D) + 1 with A = 1, D = 2, coef = (5 − 2)/2.
        assert!((g[0] - (2.0 * -0.5 + 1.5 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn objective_matches_log_joint_at_identity_weights() {
        let x = Matrix::from_row_slice(3, 2, &[0.5, -1.0, 1.5, 0.2, -0.3, 0.9]);
        let model = NiwModel::new(4.0, Matrix::identity(2, 2) * 0.5, None, x).unwrap();
        let s = NiwSummary::new(&model);
        let lambda = [2.0, 0.3, 0.3, 1.0];
        let w = uniform_weights(1, ParamShape::SymMatrix { d: 2 }).unwrap();
        let batch = SampleBatch::new(1, 4, lambda.to_vec()).unwrap();
        let v = niw_objective(&s, &w, &batch).unwrap();
        let reference = log_joint(&ModelSpec::NormalInverseWishart(model), &lambda).unwrap();
        assert!((v - reference).abs() < 1e-10 * reference.abs().max(1.0));
    }
}
