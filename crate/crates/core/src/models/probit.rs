use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::special::{norm_log_cdf, LN_2PI};

/// Probit regression `yₙ ~ Bernoulli(Φ(βᵀxₙ))`, `β ~ N(0, σ²I)`.
#[derive(Debug, Clone)]
pub struct ProbitModel {
    x: Matrix,
    y: Vec<bool>,
    prior_var: f64,
}

impl ProbitModel {
    pub fn new(x: Matrix, y: Vec<bool>, prior_var: f64) -> Result<Self> {
        Error::check_dim(x.nrows(), y.len())?;
        if !(prior_var > 0.0 && prior_var.is_finite()) {
            return Err(Error::config("probit prior variance must be positive"));
        }
        if x.ncols() == 0 {
            return Err(Error::config("probit design needs at least one column"));
        }
        Ok(ProbitModel { x, y, prior_var })
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

    pub fn design(&self) -> &Matrix {
        &self.x
    }

    pub fn labels(&self) -> &[bool] {
        &self.y
    }

    pub fn prior_var(&self) -> f64 {
        self.prior_var
    }

    /// Copy restricted to (and ordered by) `rows`.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        ProbitModel {
            x: self.x.select_rows(rows),
            y: rows.iter().map(|&r| self.y[r]).collect(),
            prior_var: self.prior_var,
        }
    }

    /// Linear predictor `βᵀxₙ`.
    pub fn predictor(&self, n: usize, beta: &[f64]) -> f64 {
        self.x.row(n).iter().zip(beta).map(|(a, b)| a * b).sum()
    }

    pub fn log_prior(&self, beta: &[f64]) -> Result<f64> {
        Error::check_dim(self.dim(), beta.len())?;
        let d = self.dim() as f64;
        let sq: f64 = beta.iter().map(|b| b * b).sum();
        Ok(-0.5 * d * (LN_2PI + self.prior_var.ln()) - 0.5 * sq / self.prior_var)
    }

    pub fn log_likelihood(&self, beta: &[f64], rows: Option<&[usize]>) -> Result<f64> {
        Error::check_dim(self.dim(), beta.len())?;
        super::check_rows(rows, self.len())?;
        let term = |n: usize| {
            let eta = self.predictor(n, beta);
            if self.y[n] {
                norm_log_cdf(eta)
            } else {
                norm_log_cdf(-eta)
            }
        };
        Ok(match rows {
            Some(rows) => rows.iter().map(|&n| term(n)).sum(),
            None => (0..self.len()).map(term).sum(),
        })
    }
}
