use serde::{Deserialize, Serialize};

use super::{gibbs_probit, hmc_mixture, sample_niw_precision, DataPartition, SamplerConfig};
use crate::draws::{Draws, ParamShape};
use crate::error::{Error, Result};
use crate::exec::Backend;
use crate::models::{ModelSpec, TemperingMode};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub acceptance_rate: Option<f64>,
    pub step_size: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub draws: Draws,
    pub diagnostics: ChainDiagnostics,
}

/// `K` index-aligned lists of subposterior draws.
#[derive(Debug, Clone, PartialEq)]
pub struct SubposteriorSampleSet {
    shape: ParamShape,
    mode: TemperingMode,
    partitions: Vec<Draws>,
    seeds: Vec<u64>,
    diagnostics: Vec<ChainDiagnostics>,
}

impl SubposteriorSampleSet {
    /// Truncates every list to the shortest one.
    pub fn new(shape: ParamShape, mode: TemperingMode, mut partitions: Vec<Draws>, seeds: Vec<u64>) -> Result<Self> {
        if partitions.is_empty() {
            return Err(Error::config("a sample set needs at least one partition"));
        }
        Error::check_dim(partitions.len(), seeds.len())?;
        for p in &partitions {
            Error::check_dim(shape.flat_len(), p.dim())?;
        }
        let t = partitions.iter().map(Draws::len).min().unwrap_or(0);
        partitions.iter_mut().for_each(|p| p.truncate(t));
        let diagnostics = vec![ChainDiagnostics::default(); partitions.len()];
        Ok(SubposteriorSampleSet {
            shape,
            mode,
            partitions,
            seeds,
            diagnostics,
        })
    }

    pub fn with_diagnostics(mut self, diagnostics: Vec<ChainDiagnostics>) -> Result<Self> {
        Error::check_dim(self.partitions.len(), diagnostics.len())?;
        self.diagnostics = diagnostics;
        Ok(self)
    }

    pub fn shape(&self) -> ParamShape {
        self.shape
    }

    pub fn mode(&self) -> TemperingMode {
        self.mode
    }

    /// Number of partitions `K`.
    pub fn k(&self) -> usize {
        self.partitions.len()
    }

    /// Common draw count `T`.
    pub fn t(&self) -> usize {
        self.partitions[0].len()
    }

    pub fn partitions(&self) -> &[Draws] {
        &self.partitions
    }

    pub fn partition(&self, k: usize) -> &Draws {
        &self.partitions[k]
    }

    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    pub fn diagnostics(&self) -> &[ChainDiagnostics] {
        &self.diagnostics
    }

    /// Draw `t` of partition `k`.
    pub fn draw(&self, k: usize, t: usize) -> &[f64] {
        self.partitions[k].row(t)
    }

    /// Stable 64-bit fingerprint of the contents.
    pub fn fingerprint(&self) -> u64 {
        let mut h = crate::rng::mix64(self.k() as u64);
        for p in &self.partitions {
            for v in p.as_flat() {
                h = crate::rng::mix64(h ^ v.to_bits());
            }
        }
        h
    }
}

/// Runs the model's sampler on one partition with an explicit chain seed.
pub fn sample_partition(
    model: &ModelSpec,
    partition: &DataPartition,
    mode: TemperingMode,
    cfg: &SamplerConfig,
    seed: u64,
) -> Result<ChainOutput> {
    match model {
        ModelSpec::Probit(m) => gibbs_probit(m, partition, mode, cfg, seed),
        ModelSpec::NormalInverseWishart(m) => sample_niw_precision(m, partition, mode, cfg, seed),
        ModelSpec::GaussianMixture(m) => hmc_mixture(m, partition, mode, cfg, seed),
    }
}

/// Serial chain on the full data with the seed partition 0 would receive.
pub fn sample_serial(model: &ModelSpec, cfg: &SamplerConfig) -> Result<SubposteriorSampleSet> {
    let seed = derive_seed(cfg.seed, 0);
    let mode = TemperingMode::Subposterior { k: 1 };
    let out = sample_partition(model, &DataPartition::full(model.len()), mode, cfg, seed)?;
    SubposteriorSampleSet::new(model.shape(), mode, vec![out.draws], vec![seed])?.with_diagnostics(vec![out.diagnostics])
}

/// [`run_parallel_with`] on the default backend.
pub fn run_parallel(
    model: &ModelSpec,
    partitions: &[DataPartition],
    mode: TemperingMode,
    cfg: &SamplerConfig,
) -> Result<SubposteriorSampleSet> {
    run_parallel_with(Backend::default(), model, partitions, mode, cfg)
}

/// One independent chain per partition, seeded with
/// `derive_seed(cfg.seed, k)`; output order follows partition order.
pub fn run_parallel_with(
    backend: Backend,
    model: &ModelSpec,
    partitions: &[DataPartition],
    mode: TemperingMode,
    cfg: &SamplerConfig,
) -> Result<SubposteriorSampleSet> {
    cfg.validate()?;
    mode.validate()?;
    let seeds: Vec<u64> = partitions.iter().map(|p| derive_seed(cfg.seed, p.index() as u64)).collect();
    let outputs = backend.try_map(partitions.len(), |i| {
        sample_partition(model, &partitions[i], mode, cfg, seeds[i]).map_err(|e| Error::Partition {
            partition: partitions[i].index(),
            source: Box::new(e),
        })
    })?;
    let (draws, diagnostics): (Vec<_>, Vec<_>) = outputs.into_iter().map(|o| (o.draws, o.diagnostics)).unzip();
    SubposteriorSampleSet::new(model.shape(), mode, draws, seeds)?.with_diagnostics(diagnostics)
}
