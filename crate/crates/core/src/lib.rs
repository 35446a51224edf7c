//! Variational consensus Monte Carlo.
//!
//! Data is split into disjoint partitions, each partition is sampled
//! independently, and the resulting subposterior draws are combined with an
//! aggregation function whose weights are tuned by projected stochastic
//! gradient ascent on a relaxed variational objective.
//!
//! The crate is organised bottom-up:
//!
//! * [`models`] – probit regression, normal/Wishart precision, and Gaussian
//!   mixture models with their (tempered) log densities.
//! * [`samplers`] – data partitioning, Gibbs / exact Wishart / HMC samplers and
//!   the deterministic parallel driver.
//! * [`aggregation`] – weight sets, baseline weights, linear, spectral and
//!   combinatorial aggregation, cluster alignment.
//! * [`variational`] – the relaxed objective, its gradients, simplex
//!   projection and the optimizer.
//! * [`evaluation`] – test-function suites, relative error, comembership and
//!   report summaries.
//!
//! Parallel loops go through [`exec::Backend`]; with the default `parallel`
//! feature they run on rayon, otherwise sequentially. Results never depend on
//! the backend or the number of threads.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod aggregation;
pub mod draws;
pub mod error;
pub mod evaluation;
pub mod exec;
pub mod linalg;
pub mod models;
pub mod rng;
pub mod samplers;
pub mod special;
pub mod variational;

pub use draws::{Draws, ParamShape};
pub use error::{Error, Result};
