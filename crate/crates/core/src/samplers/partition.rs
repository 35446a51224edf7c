use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Row indices owned by partition `index`, stored in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataPartition {
    index: usize,
    rows: Vec<usize>,
}

impl DataPartition {
    pub fn new(index: usize, mut rows: Vec<usize>) -> Self {
        rows.sort_unstable();
        DataPartition { index, rows }
    }

    /// All `n` rows in a single partition.
    pub fn full(n: usize) -> Self {
        DataPartition {
            index: 0,
            rows: (0..n).collect(),
        }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

pub type PartitionSet = Vec<DataPartition>;

/// Seeded shuffle of `0..n` followed by round-robin assignment to `k`
/// partitions; sizes differ by at most one.
pub fn partition_data(n: usize, k: usize, seed: u64) -> Result<PartitionSet> {
    if k == 0 || k > n {
        return Err(Error::config(format!("need 1 <= K <= N, got K={k}, N={n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(seed));
    let mut buckets = vec![Vec::with_capacity(n / k + 1); k];
    for (i, row) in order.into_iter().enumerate() {
        buckets[i % k].push(row);
    }
    Ok(buckets
        .into_iter()
        .enumerate()
        .map(|(i, rows)| DataPartition::new(i, rows))
        .collect())
}
