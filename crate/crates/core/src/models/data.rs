//! Dataset loading and seeded synthetic generators.

use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::rng::rng_from_seed;

/// Reads a headered numeric CSV; `label_column` is split off as 0/1 labels.
pub fn load_csv(path: &Path, label_column: Option<&str>) -> Result<(Matrix, Option<Vec<bool>>)> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => Error::Format(format!("{}: {other:?}", path.display())),
    })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?
        .clone();
    let label_idx = match label_column {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::Format(format!("{}: no `{name}` column", path.display())))?,
        ),
        None => None,
    };
    let width = headers.len() - usize::from(label_idx.is_some());
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        for (i, field) in rec.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::Format(format!("{}: row {} column {} is not a number: `{field}`", path.display(), line + 2, i + 1))
            })?;
            if Some(i) == label_idx {
                labels.push(match v {
                    0.0 => false,
                    1.0 => true,
                    _ => return Err(Error::Format(format!("{}: row {} label must be 0 or 1", path.display(), line + 2))),
                });
            } else {
                values.push(v);
            }
        }
    }
    let rows = values.len() / width.max(1);
    Ok((Matrix::from_row_slice(rows, width, &values), label_idx.map(|_| labels)))
}

/// Covariate design for synthetic probit data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProbitDesign {
    /// Standard normal covariates.
    Gaussian,
    /// Independent Bernoulli covariates with the given success probabilities.
    Binary { probs: Vec<f64> },
}

/// Synthetic probit regression data; column 0 is an intercept when
/// `intercept` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbitGenerator {
    pub n: usize,
    pub beta: Vec<f64>,
    pub design: ProbitDesign,
    pub intercept: bool,
    pub seed: u64,
}

impl ProbitGenerator {
    pub fn generate(&self) -> Result<(Matrix, Vec<bool>)> {
        let d = self.beta.len();
        if d == 0 {
            return Err(Error::config("probit generator needs a non-empty beta"));
        }
        let free = d - usize::from(self.intercept);
        if let ProbitDesign::Binary { probs } = &self.design {
            Error::check_dim(free, probs.len())?;
        }
        let mut rng = rng_from_seed(self.seed);
        let mut x = Matrix::zeros(self.n, d);
        let mut y = Vec::with_capacity(self.n);
        for n in 0..self.n {
            let offset = usize::from(self.intercept);
            if self.intercept {
                x[(n, 0)] = 1.0;
            }
            for j in 0..free {
                x[(n, offset + j)] = match &self.design {
                    ProbitDesign::Gaussian => StandardNormal.sample(&mut rng),
                    ProbitDesign::Binary { probs } => f64::from(u8::from(rng.random_bool(probs[j]))),
                };
            }
            let eta: f64 = (0..d).map(|j| x[(n, j)] * self.beta[j]).sum();
            let noise: f64 = StandardNormal.sample(&mut rng);
            y.push(eta + noise > 0.0);
        }
        Ok((x, y))
    }
}

/// Gaussian data `xₙ ~ N(0, Σ)`; `Σ` defaults to the AR(1) matrix
/// `Σ_ij = 0.5^|i-j|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NiwGenerator {
    pub n: usize,
    pub d: usize,
    #[serde(default)]
    pub covariance: Option<Vec<f64>>,
    pub seed: u64,
}

impl NiwGenerator {
    pub fn covariance_matrix(&self) -> Result<Matrix> {
        match &self.covariance {
            Some(flat) => linalg::matrix_from_flat(self.d, flat),
            None => Ok(Matrix::from_fn(self.d, self.d, |i, j| 0.5_f64.powi((i as i32 - j as i32).abs()))),
        }
    }

    pub fn generate(&self) -> Result<Matrix> {
        let cov = self.covariance_matrix()?;
        let chol = linalg::cholesky(&cov)?;
        let l = chol.l();
        let mut rng = rng_from_seed(self.seed);
        let mut x = Matrix::zeros(self.n, self.d);
        for n in 0..self.n {
            let z = linalg::Vector::from_fn(self.d, |_, _| StandardNormal.sample(&mut rng));
            let v = &l * z;
            for j in 0..self.d {
                x[(n, j)] = v[j];
            }
        }
        Ok(x)
    }
}

/// Mixture data drawn from the model itself with uniform weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureGenerator {
    pub n: usize,
    pub d: usize,
    pub clusters: usize,
    pub tau: f64,
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SyntheticMixture {
    pub x: Matrix,
    pub centers: Vec<f64>,
    pub labels: Vec<usize>,
}

impl MixtureGenerator {
    pub fn generate(&self) -> SyntheticMixture {
        let mut rng = rng_from_seed(self.seed);
        let centers: Vec<f64> = (0..self.clusters * self.d)
            .map(|_| {
                let e: f64 = StandardNormal.sample(&mut rng);
                self.tau * e
            })
            .collect();
        let (x, labels) = self.points(&centers, self.n, &mut rng);
        SyntheticMixture { x, centers, labels }
    }

    /// Fresh points from the same centers, e.g. for comembership test sets.
    pub fn test_points(&self, centers: &[f64], count: usize, seed: u64) -> Matrix {
        let mut rng = rng_from_seed(seed);
        self.points(centers, count, &mut rng).0
    }

    fn points(&self, centers: &[f64], count: usize, rng: &mut impl Rng) -> (Matrix, Vec<usize>) {
        let mut x = Matrix::zeros(count, self.d);
        let mut labels = Vec::with_capacity(count);
        for n in 0..count {
            let z = rng.random_range(0..self.clusters);
            for j in 0..self.d {
                let e: f64 = StandardNormal.sample(rng);
                x[(n, j)] = centers[z * self.d + j] + self.sigma * e;
            }
            labels.push(z);
        }
        (x, labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn csv_with_labels() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a,y,b\n1.0,1,2.0\n-0.5,0,3.5").unwrap();
        let (x, y) = load_csv(f.path(), Some("y")).unwrap();
        assert_eq!(x, Matrix::from_row_slice(2, 2, &[1.0, 2.0, -0.5, 3.5]));
        assert_eq!(y.unwrap(), vec![true, false]);
    }

    #[test]
    fn csv_errors_name_the_path() {
        let err = load_csv(Path::new("/nonexistent/data.csv"), None).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/data.csv"), "{err}");
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a,b\n1.0,x").unwrap();
        assert!(matches!(load_csv(f.path(), None), Err(Error::Format(_))));
    }

    #[test]
    fn generators_are_seeded() {
        let g = ProbitGenerator {
            n: 50,
            beta: vec![0.5, -1.0, 2.0],
            design: ProbitDesign::Binary { probs: vec![0.3, 0.6] },
            intercept: true,
            seed: 4,
        };
        let (x1, y1) = g.generate().unwrap();
        let (x2, y2) = g.generate().unwrap();
        assert_eq!(x1, x2);
        assert_eq!(y1, y2);
        assert!(x1.column(0).iter().all(|&v| v == 1.0));
        let m = MixtureGenerator { n: 30, d: 2, clusters: 3, tau: 2.0, sigma: 1.0, seed: 1 };
        assert_eq!(m.generate().x, m.generate().x);
        let n = NiwGenerator { n: 10, d: 3, covariance: None, seed: 2 };
        assert_eq!(n.generate().unwrap().shape(), (10, 3));
    }
}
