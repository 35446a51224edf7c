use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};
use crate::samplers::SubposteriorSampleSet;

/// `B` index-aligned tuples of one draw per partition, stored `[b][k][p]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    k: usize,
    dim: usize,
    data: Vec<f64>,
}

impl SampleBatch {
    pub fn new(k: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if k == 0 || dim == 0 {
            return Err(Error::config("batches need K >= 1 and a non-empty parameter"));
        }
        if data.is_empty() {
            return Err(Error::config("empty sample batch"));
        }
        if !data.len().is_multiple_of(k * dim) {
            return Err(Error::Dimension {
                expected: k * dim * (data.len() / (k * dim) + 1),
                got: data.len(),
            });
        }
        Ok(SampleBatch { k, dim, data })
    }

    /// Tuples `t ∈ indices` of a sample set.
    pub fn from_indices(samples: &SubposteriorSampleSet, indices: &[usize]) -> Result<Self> {
        let (k, dim) = (samples.k(), samples.shape().flat_len());
        let mut data = Vec::with_capacity(indices.len() * k * dim);
        for &t in indices {
            if t >= samples.t() {
                return Err(Error::Dimension { expected: samples.t(), got: t });
            }
            for kk in 0..k {
                data.extend_from_slice(samples.draw(kk, t));
            }
        }
        Self::new(k, dim, data)
    }

    /// Every tuple of a sample set.
    pub fn all(samples: &SubposteriorSampleSet) -> Result<Self> {
        Self::from_indices(samples, &(0..samples.t()).collect::<Vec<_>>())
    }

    pub fn len(&self) -> usize {
        self.data.len() / (self.k * self.dim)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Draw of partition `k` in tuple `b`.
    pub fn draw(&self, b: usize, k: usize) -> &[f64] {
        let start = (b * self.k + k) * self.dim;
        &self.data[start..start + self.dim]
    }
}

/// Draws batch indices without replacement, reshuffling at each epoch.
#[derive(Debug)]
pub struct BatchSampler {
    order: Vec<usize>,
    pos: usize,
    rng: Rng,
}

impl BatchSampler {
    pub fn new(t: usize, seed: u64) -> Result<Self> {
        if t == 0 {
            return Err(Error::config("no draws to batch"));
        }
        let mut rng = rng_from_seed(seed);
        let mut order: Vec<usize> = (0..t).collect();
        order.shuffle(&mut rng);
        Ok(BatchSampler { order, pos: 0, rng })
    }

    pub fn next_indices(&mut self, size: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(size);
        while out.len() < size {
            if self.pos == self.order.len() {
                self.order.shuffle(&mut self.rng);
                self.pos = 0;
            }
            out.push(self.order[self.pos]);
            self.pos += 1;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epochs_cover_every_index_once() {
        let mut s = BatchSampler::new(10, 1).unwrap();
        let mut a = s.next_indices(4);
        a.extend(s.next_indices(6));
        a.sort_unstable();
        assert_eq!(a, (0..10).collect::<Vec<_>>());
        let b = s.next_indices(25);
        assert_eq!(b.len(), 25);
    }

    #[test]
    fn batch_layout() {
        let b = SampleBatch::new(2, 3, (0..12).map(f64::from).collect()).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b.draw(1, 0), &[6.0, 7.0, 8.0]);
        assert!(SampleBatch::new(2, 3, vec![]).is_err());
        assert!(SampleBatch::new(2, 3, vec![0.0; 7]).is_err());
    }
}
