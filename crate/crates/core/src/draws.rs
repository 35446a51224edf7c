//! Flat storage for lists of parameter draws.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of one parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamShape {
    /// `θ ∈ ℝᵈ`.
    Vector { d: usize },
    /// A symmetric `d×d` matrix stored row-major.
    SymMatrix { d: usize },
    /// `L` cluster centers in `ℝᵈ`, stored row-major (`L×d`).
    Clusters { l: usize, d: usize },
}

impl ParamShape {
    /// Length of the flattened parameter.
    pub fn flat_len(&self) -> usize {
        match *self {
            ParamShape::Vector { d } => d,
            ParamShape::SymMatrix { d } => d * d,
            ParamShape::Clusters { l, d } => l * d,
        }
    }

    /// Ambient dimension `d`.
    pub fn d(&self) -> usize {
        match *self {
            ParamShape::Vector { d } | ParamShape::SymMatrix { d } | ParamShape::Clusters { d, .. } => d,
        }
    }

    /// Number of clusters (1 for non-mixture shapes).
    pub fn clusters(&self) -> usize {
        match *self {
            ParamShape::Clusters { l, .. } => l,
            _ => 1,
        }
    }
}

/// `len` draws of width `dim`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Draws {
    dim: usize,
    data: Vec<f64>,
}

impl Draws {
    pub fn new(dim: usize) -> Self {
        Draws { dim, data: Vec::new() }
    }

    pub fn with_capacity(dim: usize, rows: usize) -> Self {
        Draws {
            dim,
            data: Vec::with_capacity(dim * rows),
        }
    }

    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::Format(format!(
                "{} values cannot be split into rows of width {dim}",
                data.len()
            )));
        }
        Ok(Draws { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(dim: usize, rows: &[R]) -> Result<Self> {
        let mut out = Draws::with_capacity(dim, rows.len());
        for r in rows {
            out.push(r.as_ref())?;
        }
        Ok(out)
    }

    pub fn push(&mut self, row: &[f64]) -> Result<()> {
        Error::check_dim(self.dim, row.len())?;
        self.data.extend_from_slice(row);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim.max(1))
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn truncate(&mut self, rows: usize) {
        self.data.truncate(rows * self.dim);
    }

    /// Column means.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for r in self.rows() {
            for (a, b) in m.iter_mut().zip(r) {
                *a += b;
            }
        }
        let n = self.len().max(1) as f64;
        m.iter_mut().for_each(|a| *a /= n);
        m
    }
}
