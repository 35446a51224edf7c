//! The relaxed variational objective and its optimizer.
//!
//! For a weight set `W` the objective is
//! `L(W) = E_q[log p(θ̂, X)] + H̃(W)` where `θ̂` is the aggregated draw and
//! `H̃` the relaxed entropy with the weight-independent constant dropped.
//! The expectation is estimated on batches of index-aligned draw tuples.
//!
//! Per-model data terms:
//! * probit – the prior term uses subposterior moments, the likelihood a
//!   batch average; `Φ` is clamped to `[1e-12, 1 − 1e-12]`.
//! * normal/Wishart – spectral aggregation of precision draws; the data
//!   enter through `V⁻¹ + Σₙ(xₙ−μ)(xₙ−μ)ᵀ`.
//! * mixture – the expected-assignment bound
//!   `−‖θ*‖²/(2τ²) − Σₙ Σ_ℓ γ_{nℓ}‖θ*_ℓ − xₙ‖²/(2σ²)` with `γ` the softmax
//!   responsibilities at the aggregated centers.

mod batch;
mod config;
mod entropy;
mod mog;
mod niw;
mod objective;
mod optimize;
mod probit;

pub use crate::aggregation::project_to_floored_simplex;
pub use batch::{BatchSampler, SampleBatch};
pub use config::{EntropyMode, MogGradient, ObjectiveConfig};
pub use entropy::{relaxed_entropy, relaxed_entropy_grad};
pub use mog::{grad_mog, grad_mog_printed, mog_objective};
pub use niw::{grad_niw, niw_objective, NiwSummary};
pub use objective::{estimate_objective, Objective};
pub use optimize::{optimize, optimize_from, project_weights, OptimizerTrace, TraceRow};
pub use probit::{grad_probit, probit_objective};
