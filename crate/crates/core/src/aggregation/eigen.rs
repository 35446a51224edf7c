use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

const SIGN_TOLERANCE: f64 = 1e-12;
const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// `A = Rᵀ diag(D) R` with `D` descending and the rows of `R` the
/// eigenvectors, each with its first non-negligible component positive.
pub fn canonical_eigendecomposition(a: &Matrix) -> Result<(Matrix, Vec<f64>)> {
    let d = a.nrows();
    if a.ncols() != d {
        return Err(Error::Dimension { expected: d, got: a.ncols() });
    }
    let scale = a.amax().max(1.0);
    if linalg::asymmetry(a) > SYMMETRY_TOLERANCE * scale {
        return Err(Error::domain("eigendecomposition input is not symmetric"));
    }
    let eig = SymmetricEigen::new(linalg::symmetrize(a));
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut r = Matrix::zeros(d, d);
    let mut values = Vec::with_capacity(d);
    for (row, &col) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(col);
        let sign = match v.iter().find(|x| x.abs() > SIGN_TOLERANCE) {
            Some(&x) if x < 0.0 => -1.0,
            _ => 1.0,
        };
        for j in 0..d {
            r[(row, j)] = sign * v[j];
        }
        values.push(eig.eigenvalues[col]);
    }
    Ok((r, values))
}

/// `Rᵀ diag(D) R`.
pub fn reconstruct(r: &Matrix, values: &[f64]) -> Matrix {
    let d = r.nrows();
    let mut out = Matrix::zeros(d, d);
    for (i, &v) in values.iter().enumerate() {
        let row = r.row(i);
        for a in 0..d {
            for b in 0..d {
                out[(a, b)] += v * row[a] * row[b];
            }
        }
    }
    out
}
