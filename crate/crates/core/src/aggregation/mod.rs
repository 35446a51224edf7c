//! Aggregation functions and their weights.
//!
//! Three families combine one index-aligned draw from each partition:
//! linear (`Σ_k w_k ∘ θ_k`), spectral (eigenvalue-wise weighting in each
//! draw's eigenbasis, which keeps PSD matrices PSD) and combinatorial
//! (per-cluster linear weights after relabelling each partition's clusters).

mod aggregate;
mod align;
mod eigen;
mod hungarian;
mod projection;
mod weights;

pub use aggregate::{
    aggregate, aggregate_combinatorial, aggregate_linear, aggregate_spectral, aggregate_with, spectral_combine,
    AggregatedSampleSet, Provenance, PSD_TOLERANCE,
};
pub use align::{align_clusters, align_means, alignment_cost, alignment_objective};
pub use eigen::{canonical_eigendecomposition, reconstruct};
pub use hungarian::{assignment_cost, hungarian};
pub use projection::project_to_floored_simplex;
pub use weights::{
    gaussian_weights, gaussian_weights_aligned, gaussian_weights_from_moments, uniform_weights,
    uniform_weights_aligned, Alignment, WeightFamily, WeightSet, VARIANCE_JITTER, WEIGHT_FLOOR,
};
