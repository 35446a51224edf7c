use crate::draws::{Draws, ParamShape};
use crate::error::{Error, Result};
use crate::exec::Backend;
use crate::linalg::Matrix;

/// Responsibility-argmax cluster of each test point under one draw of
/// centers (uniform weights, shared isotropic variance), so the nearest
/// center; ties go to the lowest label.
pub fn assign_clusters(centers: &[f64], l: usize, d: usize, points: &Matrix) -> Vec<usize> {
    (0..points.nrows())
        .map(|i| {
            let mut best = (0, f64::INFINITY);
            for c in 0..l {
                let dist: f64 = (0..d).map(|j| (points[(i, j)] - centers[c * d + j]).powi(2)).sum();
                if dist < best.1 {
                    best = (c, dist);
                }
            }
            best.0
        })
        .collect()
}

/// Fraction of draws in which each pair of test points shares a cluster.
pub fn comembership_matrix(draws: &Draws, shape: ParamShape, points: &Matrix) -> Result<Matrix> {
    let ParamShape::Clusters { l, d } = shape else {
        return Err(Error::config("comembership needs mixture parameters"));
    };
    Error::check_dim(shape.flat_len(), draws.dim())?;
    Error::check_dim(d, points.ncols())?;
    let n = points.nrows();
    if n == 0 {
        return Err(Error::config("comembership needs at least one test point"));
    }
    if draws.is_empty() {
        return Err(Error::config("comembership needs at least one draw"));
    }
    let labels: Vec<Vec<usize>> = draws.rows().map(|c| assign_clusters(c, l, d, points)).collect();
    let counts = Backend::default().map(n, |i| {
        (0..n)
            .map(|j| labels.iter().filter(|z| z[i] == z[j]).count())
            .collect::<Vec<_>>()
    });
    let t = draws.len() as f64;
    Ok(Matrix::from_fn(n, n, |i, j| counts[i][j] as f64 / t))
}
