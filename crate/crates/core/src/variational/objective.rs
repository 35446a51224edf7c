use super::mog::mog_terms;
use super::niw::{niw_terms, NiwSummary};
use super::probit::probit_terms;
use super::{relaxed_entropy, relaxed_entropy_grad, EntropyMode, MogGradient, ObjectiveConfig, SampleBatch};
use crate::aggregation::{align_clusters, uniform_weights, uniform_weights_aligned, WeightSet};
use crate::error::Result;
use crate::exec::Backend;
use crate::models::{compute_moments, MixtureModel, ModelSpec, NiwModel, ProbitModel, SubposteriorMoments};
use crate::samplers::SubposteriorSampleSet;

#[derive(Debug, Clone)]
enum Terms<'a> {
    Probit(&'a ProbitModel, SubposteriorMoments),
    Niw(NiwSummary),
    Mixture(&'a MixtureModel, MogGradient),
}

/// The relaxed objective of one model, with any per-sample-set summaries
/// precomputed.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    terms: Terms<'a>,
    entropy: EntropyMode,
    backend: Backend,
}

impl<'a> Objective<'a> {
    /// Probit moments are taken from the whole sample set.
    pub fn new(model: &'a ModelSpec, samples: &SubposteriorSampleSet, cfg: &ObjectiveConfig) -> Result<Self> {
        Ok(match model {
            ModelSpec::Probit(m) => Self::probit(m, compute_moments(samples)?, cfg.entropy),
            ModelSpec::NormalInverseWishart(m) => Self::niw(m, cfg.entropy),
            ModelSpec::GaussianMixture(m) => Self::mixture(m, cfg.entropy, cfg.mog_gradient),
        })
    }

    pub fn probit(model: &'a ProbitModel, moments: SubposteriorMoments, entropy: EntropyMode) -> Self {
        Objective {
            terms: Terms::Probit(model, moments),
            entropy,
            backend: Backend::default(),
        }
    }

    pub fn niw(model: &NiwModel, entropy: EntropyMode) -> Self {
        Objective {
            terms: Terms::Niw(NiwSummary::new(model)),
            entropy,
            backend: Backend::default(),
        }
    }

    pub fn mixture(model: &'a MixtureModel, entropy: EntropyMode, gradient: MogGradient) -> Self {
        Objective {
            terms: Terms::Mixture(model, gradient),
            entropy,
            backend: Backend::default(),
        }
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn entropy(&self) -> EntropyMode {
        self.entropy
    }

    /// Uniform weights in the model's family; mixtures are aligned first.
    pub fn initial_weights(&self, samples: &SubposteriorSampleSet) -> Result<WeightSet> {
        match self.terms {
            Terms::Mixture(..) => uniform_weights_aligned(&align_clusters(samples)?, samples.shape()),
            _ => uniform_weights(samples.k(), samples.shape()),
        }
    }

    fn model_terms(&self, weights: &WeightSet, batch: &SampleBatch) -> Result<(f64, Vec<f64>)> {
        match &self.terms {
            Terms::Probit(m, moments) => probit_terms(m, moments, weights, batch, self.backend),
            Terms::Niw(s) => niw_terms(s, weights, batch, self.backend),
            Terms::Mixture(m, kind) => mog_terms(m, weights, batch, *kind, self.backend),
        }
    }

    /// Batch estimate of the objective (up to an additive constant).
    pub fn value(&self, weights: &WeightSet, batch: &SampleBatch) -> Result<f64> {
        Ok(self.model_terms(weights, batch)?.0 + relaxed_entropy(weights, self.entropy)?)
    }

    /// Value and gradient, both in weight layout.
    pub fn value_and_grad(&self, weights: &WeightSet, batch: &SampleBatch) -> Result<(f64, Vec<f64>)> {
        let (v, mut g) = self.model_terms(weights, batch)?;
        for (o, e) in g.iter_mut().zip(relaxed_entropy_grad(weights, self.entropy)?) {
            *o += e;
        }
        Ok((v + relaxed_entropy(weights, self.entropy)?, g))
    }
}

/// Batch estimate of `E_q[log p(θ̂, X)] + H̃(W)`.
pub fn estimate_objective(objective: &Objective<'_>, weights: &WeightSet, batch: &SampleBatch) -> Result<f64> {
    objective.value(weights, batch)
}
