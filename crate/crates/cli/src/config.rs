//! Experiment configuration, loaded from TOML or JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vcmc::evaluation::{Algorithm, SuiteTag};
use vcmc::models::{MixtureGenerator, ModelTag, NiwGenerator, ProbitGenerator, TemperingMode};
use vcmc::samplers::io::SampleFormat;
use vcmc::samplers::SamplerConfig;
use vcmc::variational::ObjectiveConfig;
use vcmc::ParamShape;

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: Option<String>,
    /// Master seed. Chains use it directly; every other stream is derived.
    #[serde(default)]
    pub seed: u64,
    pub model: ModelConfig,
    pub partitions: Partitions,
    #[serde(default)]
    pub tempering: Tempering,
    /// `sampler.seed` is ignored; the master seed drives the chains.
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub reference: ReferenceConfig,
    #[serde(default)]
    pub objective: ObjectiveConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::UniformCmc, Algorithm::GaussianCmc, Algorithm::Vcmc]
}

/// A single `K` or a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Partitions {
    Single(usize),
    Sweep(Vec<usize>),
}

impl Partitions {
    pub fn values(&self) -> Vec<usize> {
        match self {
            Partitions::Single(k) => vec![*k],
            Partitions::Sweep(ks) => ks.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tempering {
    #[default]
    Subposterior,
    PartialPosterior,
}

impl Tempering {
    pub fn mode(&self, k: usize) -> TemperingMode {
        match self {
            Tempering::Subposterior => TemperingMode::Subposterior { k },
            Tempering::PartialPosterior => TemperingMode::PartialPosterior,
        }
    }
}

/// The long serial chain all algorithms are compared against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceConfig {
    /// Reference draws per parallel-chain draw.
    pub draw_multiplier: usize,
    /// Overrides the derived reference seed.
    pub seed: Option<u64>,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        ReferenceConfig {
            draw_multiplier: 10,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    /// Defaults depend on the model.
    pub suites: Option<Vec<SuiteTag>>,
    /// Number of data points used as comembership test points.
    pub test_points: Option<usize>,
    /// Keep only this fraction of comembership functions, ranked jointly.
    pub trim_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: SampleFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("results"),
            format: SampleFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DataSource<G> {
    Synthetic(G),
    File {
        path: PathBuf,
        #[serde(default)]
        label_column: Option<String>,
    },
}

impl<G> DataSource<G> {
    fn path(&self) -> Option<&Path> {
        match self {
            DataSource::File { path, .. } => Some(path),
            DataSource::Synthetic(_) => None,
        }
    }

    fn path_mut(&mut self) -> Option<&mut PathBuf> {
        match self {
            DataSource::File { path, .. } => Some(path),
            DataSource::Synthetic(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelConfig {
    Probit {
        #[serde(default = "unit")]
        prior_var: f64,
        data: DataSource<ProbitGenerator>,
    },
    Niw {
        dof: f64,
        /// Row-major `d×d` scale matrix; identity when omitted.
        #[serde(default)]
        scale: Option<Vec<f64>>,
        /// Known mean; the sample mean when omitted.
        #[serde(default)]
        mean: Option<Vec<f64>>,
        data: DataSource<NiwGenerator>,
    },
    Mixture {
        clusters: usize,
        prior_var: f64,
        lik_var: f64,
        /// Uniform when omitted.
        #[serde(default)]
        weights: Option<Vec<f64>>,
        data: DataSource<MixtureGenerator>,
    },
}

fn unit() -> f64 {
    1.0
}

impl ModelConfig {
    pub fn tag(&self) -> ModelTag {
        match self {
            ModelConfig::Probit { .. } => ModelTag::Probit,
            ModelConfig::Niw { .. } => ModelTag::NormalInverseWishart,
            ModelConfig::Mixture { .. } => ModelTag::GaussianMixture,
        }
    }

    fn data_path(&self) -> Option<&Path> {
        match self {
            ModelConfig::Probit { data, .. } => data.path(),
            ModelConfig::Niw { data, .. } => data.path(),
            ModelConfig::Mixture { data, .. } => data.path(),
        }
    }

    fn data_path_mut(&mut self) -> Option<&mut PathBuf> {
        match self {
            ModelConfig::Probit { data, .. } => data.path_mut(),
            ModelConfig::Niw { data, .. } => data.path_mut(),
            ModelConfig::Mixture { data, .. } => data.path_mut(),
        }
    }
}

pub fn default_suites(tag: ModelTag) -> Vec<SuiteTag> {
    match tag {
        ModelTag::Probit => vec![SuiteTag::FirstMoments, SuiteTag::PureSecondMoments, SuiteTag::MixedSecondMoments],
        ModelTag::NormalInverseWishart => vec![SuiteTag::Eigenvalues, SuiteTag::EigenvaluePairs],
        ModelTag::GaussianMixture => vec![SuiteTag::Comembership],
    }
}

fn suite_fits(suite: SuiteTag, tag: ModelTag) -> bool {
    match suite {
        SuiteTag::FirstMoments | SuiteTag::PureSecondMoments | SuiteTag::MixedSecondMoments => true,
        SuiteTag::Eigenvalues | SuiteTag::EigenvaluePairs => tag == ModelTag::NormalInverseWishart,
        SuiteTag::Comembership => tag == ModelTag::GaussianMixture,
    }
}

impl ExperimentConfig {
    /// Reads TOML, or JSON for a `.json` extension. Relative data paths are
    /// resolved against the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text, path.extension().is_some_and(|e| e == "json"))
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let (Some(p), Some(base)) = (cfg.model.data_path_mut(), path.parent()) {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses without validating.
    pub fn parse(text: &str, json: bool) -> std::result::Result<Self, String> {
        if json {
            serde_json::from_str(text).map_err(|e| e.to_string())
        } else {
            toml::from_str(text).map_err(|e| e.to_string())
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(CliError::Config(format!("{field}: {msg}")));
        if self.schema_version != SCHEMA_VERSION {
            return bad("schema_version", format!("expected {SCHEMA_VERSION}, found {}", self.schema_version));
        }
        let ks = self.partitions.values();
        if ks.is_empty() {
            return bad("partitions", "the K sweep is empty".into());
        }
        if let Some(&k) = ks.iter().find(|&&k| k == 0) {
            return bad("partitions", format!("K must be >= 1, found {k}"));
        }
        let mut sorted = ks.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != ks.len() {
            return bad("partitions", "duplicate K values".into());
        }
        if let Some(p) = self.model.data_path() {
            if !p.exists() {
                return bad("model.data.path", format!("{} does not exist", p.display()));
            }
        }
        self.sampler.validate().or_else(|e| bad("sampler", e.to_string()))?;
        self.objective.validate().or_else(|e| bad("objective", e.to_string()))?;
        if self.reference.draw_multiplier == 0 {
            return bad("reference.draw_multiplier", "must be >= 1".into());
        }
        if self.algorithms.is_empty() {
            return bad("algorithms", "at least one algorithm is required".into());
        }
        if self.algorithms.contains(&Algorithm::Serial) {
            return bad("algorithms", "the serial reference always runs and cannot be listed".into());
        }
        let mut algs = self.algorithms.iter().map(Algorithm::as_str).collect::<Vec<_>>();
        algs.sort_unstable();
        algs.dedup();
        if algs.len() != self.algorithms.len() {
            return bad("algorithms", "duplicate entries".into());
        }
        let tag = self.model.tag();
        for s in self.suites() {
            if !suite_fits(s, tag) {
                return bad("evaluation.suites", format!("`{}` does not apply to the {} model", s.as_str(), tag.as_str()));
            }
        }
        if let Some(f) = self.evaluation.trim_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return bad("evaluation.trim_fraction", format!("must lie in (0, 1], found {f}"));
            }
        }
        if self.evaluation.test_points == Some(0) {
            return bad("evaluation.test_points", "must be >= 1".into());
        }
        match &self.model {
            ModelConfig::Probit { prior_var, .. } if !(*prior_var > 0.0) => bad("model.prior_var", "must be positive".into()),
            ModelConfig::Niw { dof, .. } if !(*dof > 0.0) => bad("model.dof", "must be positive".into()),
            ModelConfig::Mixture { clusters: 0, .. } => bad("model.clusters", "must be >= 1".into()),
            _ => Ok(()),
        }
    }

    pub fn suites(&self) -> Vec<SuiteTag> {
        self.evaluation.suites.clone().unwrap_or_else(|| default_suites(self.model.tag()))
    }

    pub fn ks(&self) -> Vec<usize> {
        self.partitions.values()
    }

    /// Canonical JSON used for hashing and for the copy stored with results.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        crate::output::hex(&Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn test_point_count(&self, shape: ParamShape) -> usize {
        match shape {
            ParamShape::Clusters { .. } => self.evaluation.test_points.unwrap_or(50),
            _ => 0,
        }
    }
}
