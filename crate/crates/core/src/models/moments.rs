use crate::draws::Draws;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::samplers::SubposteriorSampleSet;

/// Per-partition mean `μ_k` and (non-centered) second moment `S_k = mean θθᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubposteriorMoments {
    pub means: Vec<Vec<f64>>,
    pub second: Vec<Matrix>,
}

impl SubposteriorMoments {
    pub fn partitions(&self) -> usize {
        self.means.len()
    }

    /// Moments of a single list of draws.
    pub fn of_draws(draws: &Draws) -> (Vec<f64>, Matrix) {
        let p = draws.dim();
        let mut s = Matrix::zeros(p, p);
        for r in draws.rows() {
            for i in 0..p {
                for j in 0..=i {
                    s[(i, j)] += r[i] * r[j];
                }
            }
        }
        let n = draws.len() as f64;
        for i in 0..p {
            for j in 0..=i {
                let v = s[(i, j)] / n;
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        (draws.mean(), s)
    }

    pub fn from_draws(parts: &[Draws]) -> Result<Self> {
        let mut means = Vec::with_capacity(parts.len());
        let mut second = Vec::with_capacity(parts.len());
        for (k, d) in parts.iter().enumerate() {
            if d.len() < 2 {
                return Err(Error::TooFewSamples {
                    partition: k,
                    needed: 2,
                    got: d.len(),
                });
            }
            let (m, s) = Self::of_draws(d);
            means.push(m);
            second.push(s);
        }
        Ok(SubposteriorMoments { means, second })
    }
}

pub fn compute_moments(samples: &SubposteriorSampleSet) -> Result<SubposteriorMoments> {
    SubposteriorMoments::from_draws(samples.partitions())
}
