use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::special::{ln_mv_gamma, LN_2PI};

/// `Λ ~ Wishart(ν, V)`, `xₙ | Λ ~ N(μ, Λ⁻¹)` with `μ` supplied as a fixed
/// point estimate.
///
/// The Wishart density is `|Λ|^{(ν-d-1)/2} exp(-tr(V⁻¹Λ)/2)` up to its
/// normalizer, so `E[Λ] = νV`.
#[derive(Debug, Clone)]
pub struct NiwModel {
    dof: f64,
    scale: Matrix,
    scale_inv: Matrix,
    log_norm: f64,
    mean: Vector,
    x: Matrix,
}

impl NiwModel {
    /// `mean = None` uses the sample mean of `x` (zero when `x` is empty).
    pub fn new(dof: f64, scale: Matrix, mean: Option<Vec<f64>>, x: Matrix) -> Result<Self> {
        let d = scale.nrows();
        if d == 0 || scale.ncols() != d {
            return Err(Error::config("Wishart scale must be a non-empty square matrix"));
        }
        Error::check_dim(d, x.ncols())?;
        if linalg::asymmetry(&scale) > 1e-10 {
            return Err(Error::config("Wishart scale must be symmetric"));
        }
        if !(dof > d as f64 - 1.0) {
            return Err(Error::config(format!("Wishart degrees of freedom must exceed d-1 = {}", d - 1)));
        }
        let scale_inv = linalg::inverse_pd(&scale)
            .map_err(|_| Error::config("Wishart scale must be positive definite"))?;
        let log_det_scale = linalg::log_det_pd(&scale)?;
        let mean = match mean {
            Some(m) => {
                Error::check_dim(d, m.len())?;
                Vector::from_vec(m)
            }
            None if x.nrows() == 0 => Vector::zeros(d),
            None => x.row_mean().transpose(),
        };
        let df = d as f64;
        let log_norm = -0.5 * dof * df * std::f64::consts::LN_2 - 0.5 * dof * log_det_scale - ln_mv_gamma(d, 0.5 * dof);
        Ok(NiwModel {
            dof,
            scale,
            scale_inv,
            log_norm,
            mean,
            x,
        })
    }

    pub fn dim(&self) -> usize {
        self.scale.nrows()
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dof(&self) -> f64 {
        self.dof
    }

    pub fn scale(&self) -> &Matrix {
        &self.scale
    }

    pub fn scale_inv(&self) -> &Matrix {
        &self.scale_inv
    }

    /// Log normalizer of the Wishart prior.
    pub fn log_normalizer(&self) -> f64 {
        self.log_norm
    }

    pub fn mean(&self) -> &Vector {
        &self.mean
    }

    pub fn data(&self) -> &Matrix {
        &self.x
    }

    /// `Σ_{n∈rows} (xₙ-μ)(xₙ-μ)ᵀ`, all rows for `None`.
    pub fn scatter(&self, rows: Option<&[usize]>) -> Matrix {
        let d = self.dim();
        let mut s = Matrix::zeros(d, d);
        let mut add = |n: usize| {
            let c = self.x.row(n).transpose() - &self.mean;
            s.ger(1.0, &c, &c, 1.0);
        };
        match rows {
            Some(rows) => rows.iter().for_each(|&n| add(n)),
            None => (0..self.len()).for_each(&mut add),
        }
        s
    }

    fn precision(&self, theta: &[f64]) -> Result<(Matrix, f64)> {
        let lambda = linalg::matrix_from_flat(self.dim(), theta)?;
        if linalg::asymmetry(&lambda) > 1e-9 * lambda.amax().max(1.0) {
            return Err(Error::domain("precision matrix is not symmetric"));
        }
        let lambda = linalg::symmetrize(&lambda);
        let log_det = linalg::log_det_pd(&lambda).map_err(|_| Error::domain("precision matrix is not positive definite"))?;
        Ok((lambda, log_det))
    }

    pub fn log_prior(&self, theta: &[f64]) -> Result<f64> {
        let (lambda, log_det) = self.precision(theta)?;
        let d = self.dim() as f64;
        let tr = (&self.scale_inv * &lambda).trace();
        Ok(self.log_norm + 0.5 * (self.dof - d - 1.0) * log_det - 0.5 * tr)
    }

    pub fn log_likelihood(&self, theta: &[f64], rows: Option<&[usize]>) -> Result<f64> {
        super::check_rows(rows, self.len())?;
        let (lambda, log_det) = self.precision(theta)?;
        let count = rows.map_or(self.len(), |r| r.len()) as f64;
        let scatter = self.scatter(rows);
        let d = self.dim() as f64;
        Ok(0.5 * count * (log_det - d * LN_2PI) - 0.5 * (&lambda * scatter).trace())
    }
}
