//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Builds a `d×d` matrix from a row-major slice.
pub fn matrix_from_flat(d: usize, flat: &[f64]) -> Result<Matrix> {
    Error::check_dim(d * d, flat.len())?;
    Ok(Matrix::from_row_slice(d, d, flat))
}

/// Row-major flattening.
pub fn matrix_to_flat(m: &Matrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Largest absolute asymmetry `|a_ij - a_ji|`.
pub fn asymmetry(m: &Matrix) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

pub fn cholesky(m: &Matrix) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m.clone()).ok_or_else(|| Error::domain("matrix is not positive definite"))
}

/// `ln det` of a positive-definite matrix.
pub fn log_det_pd(m: &Matrix) -> Result<f64> {
    let c = cholesky(m)?;
    Ok(2.0 * c.l_dirty().diagonal().iter().map(|x| x.ln()).sum::<f64>())
}

pub fn inverse_pd(m: &Matrix) -> Result<Matrix> {
    Ok(cholesky(m)?.inverse())
}

pub fn eigenvalues_sym(m: &Matrix) -> Vector {
    SymmetricEigen::new(symmetrize(m)).eigenvalues
}

pub fn min_eigenvalue(m: &Matrix) -> f64 {
    eigenvalues_sym(m).iter().copied().fold(f64::INFINITY, f64::min)
}

/// Ratio of extreme eigenvalues of a symmetric matrix.
pub fn condition_number(m: &Matrix) -> f64 {
    let ev = eigenvalues_sym(m);
    let hi = ev.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let lo = ev.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    hi / lo
}

/// `(XᵀX)` accumulated over selected rows of `x`.
pub fn gram_rows(x: &Matrix, rows: &[usize]) -> Matrix {
    let d = x.ncols();
    let mut g = Matrix::zeros(d, d);
    for &n in rows {
        for i in 0..d {
            let xi = x[(n, i)];
            for j in 0..=i {
                g[(i, j)] += xi * x[(n, j)];
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            g[(j, i)] = g[(i, j)];
        }
    }
    g
}
