//! Data partitioning and the per-partition MCMC samplers.

mod config;
mod gibbs;
mod hmc;
pub mod io;
mod parallel;
mod partition;
pub mod truncnorm;
mod wishart;

pub use config::SamplerConfig;
pub use gibbs::{gibbs_probit, probit_conditional_beta};
pub use hmc::{hmc_mixture, leapfrog_energy_error, HmcTrajectory};
pub use parallel::{
    run_parallel, run_parallel_with, sample_partition, sample_serial, ChainDiagnostics, ChainOutput,
    SubposteriorSampleSet,
};
pub use partition::{partition_data, DataPartition, PartitionSet};
pub use wishart::{sample_niw_precision, sample_wishart, tempered_wishart_prior, WishartParams};
