use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::special::LN_2PI;

/// Gaussian mixture with known weights and variances:
/// `θ_ℓ ~ N(0, τ²I)`, `Zₙ ~ Cat(π)`, `xₙ | Zₙ=ℓ ~ N(θ_ℓ, σ²I)`.
///
/// Parameters are the `L×d` centers flattened row-major.
#[derive(Debug, Clone)]
pub struct MixtureModel {
    clusters: usize,
    prior_var: f64,
    lik_var: f64,
    log_weights: Vec<f64>,
    weights: Vec<f64>,
    x: Matrix,
}

impl MixtureModel {
    pub fn new(clusters: usize, prior_var: f64, lik_var: f64, weights: Vec<f64>, x: Matrix) -> Result<Self> {
        if clusters == 0 {
            return Err(Error::config("mixture needs at least one cluster"));
        }
        Error::check_dim(clusters, weights.len())?;
        if !(prior_var > 0.0 && lik_var > 0.0) {
            return Err(Error::config("mixture variances must be positive"));
        }
        if weights.iter().any(|&w| w < 0.0) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::config("mixture weights must lie on the simplex"));
        }
        if x.ncols() == 0 {
            return Err(Error::config("mixture data needs at least one column"));
        }
        Ok(MixtureModel {
            clusters,
            prior_var,
            lik_var,
            log_weights: weights.iter().map(|w| w.ln()).collect(),
            weights,
            x,
        })
    }

    pub fn clusters(&self) -> usize {
        self.clusters
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn prior_var(&self) -> f64 {
        self.prior_var
    }

    pub fn lik_var(&self) -> f64 {
        self.lik_var
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn data(&self) -> &Matrix {
        &self.x
    }

    pub fn point(&self, n: usize) -> Vec<f64> {
        self.x.row(n).iter().copied().collect()
    }

    fn check(&self, theta: &[f64]) -> Result<()> {
        Error::check_dim(self.clusters * self.dim(), theta.len())
    }

    pub fn log_prior(&self, theta: &[f64]) -> Result<f64> {
        self.check(theta)?;
        let p = theta.len() as f64;
        let sq: f64 = theta.iter().map(|t| t * t).sum();
        Ok(-0.5 * p * (LN_2PI + self.prior_var.ln()) - 0.5 * sq / self.prior_var)
    }

    /// Per-cluster log joint `ln π_ℓ + ln N(x; θ_ℓ, σ²I)` for one point.
    pub fn component_logits(&self, theta: &[f64], x: &[f64], out: &mut [f64]) {
        let d = self.dim();
        let norm = -0.5 * d as f64 * (LN_2PI + self.lik_var.ln());
        for (l, o) in out.iter_mut().enumerate() {
            let c = &theta[l * d..(l + 1) * d];
            let sq: f64 = c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            *o = self.log_weights[l] + norm - 0.5 * sq / self.lik_var;
        }
    }

    pub fn log_likelihood(&self, theta: &[f64], rows: Option<&[usize]>) -> Result<f64> {
        self.check(theta)?;
        super::check_rows(rows, self.len())?;
        let mut buf = vec![0.0; self.clusters];
        let mut point = vec![0.0; self.dim()];
        let mut term = |n: usize| {
            for (p, v) in point.iter_mut().zip(self.x.row(n).iter()) {
                *p = *v;
            }
            self.component_logits(theta, &point, &mut buf);
            crate::special::log_sum_exp(&buf)
        };
        Ok(match rows {
            Some(rows) => rows.iter().map(|&n| term(n)).sum(),
            None => (0..self.len()).map(term).sum(),
        })
    }

    /// Value and gradient of `log p(X_rows | θ) + prior_power · log p(θ)`.
    pub fn log_density_and_grad(&self, theta: &[f64], rows: &[usize], prior_power: f64, grad: &mut [f64]) -> Result<f64> {
        self.check(theta)?;
        Error::check_dim(theta.len(), grad.len())?;
        let d = self.dim();
        let mut value = prior_power * self.log_prior(theta)?;
        for (g, t) in grad.iter_mut().zip(theta) {
            *g = -prior_power * t / self.prior_var;
        }
        let mut resp = vec![0.0; self.clusters];
        let mut point = vec![0.0; d];
        for &n in rows {
            for (p, v) in point.iter_mut().zip(self.x.row(n).iter()) {
                *p = *v;
            }
            self.component_logits(theta, &point, &mut resp);
            value += crate::special::softmax_in_place(&mut resp);
            for (l, r) in resp.iter().enumerate() {
                let c = &theta[l * d..(l + 1) * d];
                for j in 0..d {
                    grad[l * d + j] += r * (point[j] - c[j]) / self.lik_var;
                }
            }
        }
        Ok(value)
    }
}
