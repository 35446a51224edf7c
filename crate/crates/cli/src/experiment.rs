//! The experiment pipeline in memory, independent of any files.

use std::time::Instant;

use rand::seq::SliceRandom;
use vcmc::aggregation::{
    aggregate, align_clusters, gaussian_weights, gaussian_weights_aligned, uniform_weights, uniform_weights_aligned,
    AggregatedSampleSet, WeightSet,
};
use vcmc::evaluation::{estimate_expectations, joint_trim_mask, Algorithm, EvaluationReport, SuiteTag, TestFunctionSuite};
use vcmc::linalg::{self, Matrix};
use vcmc::models::{load_csv, MixtureModel, ModelSpec, NiwModel, ProbitModel, TemperingMode};
use vcmc::rng::{derive_seed, rng_from_seed};
use vcmc::samplers::{partition_data, run_parallel, sample_serial, SamplerConfig, SubposteriorSampleSet};
use vcmc::variational::{optimize, OptimizerTrace};
use vcmc::{Draws, ParamShape};

use crate::config::{DataSource, ExperimentConfig, ModelConfig};
use crate::error::{CliError, Result, StageContext};

const STREAM_REFERENCE: u64 = 1;
const STREAM_PARTITION: u64 = 2;
const STREAM_OPTIMIZER: u64 = 3;
const STREAM_TEST_POINTS: u64 = 4;

fn load_features(path: &std::path::Path, label: Option<&str>) -> Result<(Matrix, Option<Vec<bool>>)> {
    load_csv(path, label).stage("load data")
}

pub fn build_model(cfg: &ExperimentConfig) -> Result<ModelSpec> {
    let spec = match &cfg.model {
        ModelConfig::Probit { prior_var, data } => {
            let (x, y) = match data {
                DataSource::Synthetic(g) => g.generate().stage("generate data")?,
                DataSource::File { path, label_column } => {
                    let (x, y) = load_features(path, Some(label_column.as_deref().unwrap_or("y")))?;
                    (x, y.unwrap_or_default())
                }
            };
            ModelSpec::Probit(ProbitModel::new(x, y, *prior_var).stage("build model")?)
        }
        ModelConfig::Niw { dof, scale, mean, data } => {
            let x = match data {
                DataSource::Synthetic(g) => g.generate().stage("generate data")?,
                DataSource::File { path, .. } => load_features(path, None)?.0,
            };
            let d = x.ncols();
            let scale = match scale {
                Some(flat) => linalg::matrix_from_flat(d, flat).stage("model.scale")?,
                None => Matrix::identity(d, d),
            };
            ModelSpec::NormalInverseWishart(NiwModel::new(*dof, scale, mean.clone(), x).stage("build model")?)
        }
        ModelConfig::Mixture {
            clusters,
            prior_var,
            lik_var,
            weights,
            data,
        } => {
            let x = match data {
                DataSource::Synthetic(g) => g.generate().x,
                DataSource::File { path, .. } => load_features(path, None)?.0,
            };
            let w = weights.clone().unwrap_or_else(|| vec![1.0 / *clusters as f64; *clusters]);
            ModelSpec::GaussianMixture(MixtureModel::new(*clusters, *prior_var, *lik_var, w, x).stage("build model")?)
        }
    };
    Ok(spec)
}

/// Comembership test points: a seeded subset of the data rows.
pub fn test_points(cfg: &ExperimentConfig, model: &ModelSpec) -> Result<Option<Matrix>> {
    let ModelSpec::GaussianMixture(m) = model else {
        return Ok(None);
    };
    let count = cfg.test_point_count(model.shape());
    if count > m.len() {
        return Err(CliError::Config(format!(
            "evaluation.test_points: {count} requested but the data has {} rows",
            m.len()
        )));
    }
    let mut rows: Vec<usize> = (0..m.len()).collect();
    rows.shuffle(&mut rng_from_seed(derive_seed(cfg.seed, STREAM_TEST_POINTS)));
    rows.truncate(count);
    rows.sort_unstable();
    let d = m.dim();
    Ok(Some(Matrix::from_fn(count, d, |i, j| m.data()[(rows[i], j)])))
}

pub fn chain_config(cfg: &ExperimentConfig) -> SamplerConfig {
    SamplerConfig {
        seed: cfg.seed,
        ..cfg.sampler.clone()
    }
}

/// The chain settings scaled so that the reference keeps
/// `draw_multiplier` times as many draws.
pub fn reference_config(cfg: &ExperimentConfig) -> SamplerConfig {
    let s = &cfg.sampler;
    SamplerConfig {
        iterations: s.burn_in + cfg.reference.draw_multiplier * (s.iterations - s.burn_in),
        seed: cfg.reference.seed.unwrap_or_else(|| derive_seed(cfg.seed, STREAM_REFERENCE)),
        ..s.clone()
    }
}

pub fn partition_seed(cfg: &ExperimentConfig, k: usize) -> u64 {
    derive_seed(derive_seed(cfg.seed, STREAM_PARTITION), k as u64)
}

pub fn optimizer_seed(cfg: &ExperimentConfig, k: usize) -> u64 {
    derive_seed(derive_seed(cfg.seed, STREAM_OPTIMIZER), k as u64)
}

pub fn sample_reference(cfg: &ExperimentConfig, model: &ModelSpec) -> Result<SubposteriorSampleSet> {
    sample_serial(model, &reference_config(cfg)).stage("serial reference")
}

pub fn sample_partitions(cfg: &ExperimentConfig, model: &ModelSpec, k: usize) -> Result<SubposteriorSampleSet> {
    let stage = format!("sampling K={k}");
    let parts = partition_data(model.len(), k, partition_seed(cfg, k)).stage(&stage)?;
    run_parallel(model, &parts, cfg.tempering.mode(k), &chain_config(cfg)).stage(stage)
}

/// Uniform or Gaussian weights; mixtures are aligned first.
pub fn baseline_weights(algorithm: Algorithm, samples: &SubposteriorSampleSet) -> Result<WeightSet> {
    let stage = format!("{} weights K={}", algorithm.as_str(), samples.k());
    let shape = samples.shape();
    let aligned = match shape {
        ParamShape::Clusters { .. } => Some(align_clusters(samples).stage(&stage)?),
        _ => None,
    };
    let w = match (algorithm, &aligned) {
        (Algorithm::UniformCmc, None) => uniform_weights(samples.k(), shape),
        (Algorithm::UniformCmc, Some(a)) => uniform_weights_aligned(a, shape),
        (Algorithm::GaussianCmc, None) => gaussian_weights(samples),
        (Algorithm::GaussianCmc, Some(a)) => gaussian_weights_aligned(samples, a),
        (other, _) => {
            return Err(CliError::Invalid(format!("`{}` has no baseline weights", other.as_str())));
        }
    };
    w.stage(stage)
}

pub fn vcmc_weights(cfg: &ExperimentConfig, model: &ModelSpec, samples: &SubposteriorSampleSet) -> Result<(WeightSet, OptimizerTrace)> {
    optimize(model, samples, &cfg.objective, optimizer_seed(cfg, samples.k())).stage(format!("optimization K={}", samples.k()))
}

pub fn suites(cfg: &ExperimentConfig, shape: ParamShape) -> Result<Vec<TestFunctionSuite>> {
    cfg.suites()
        .into_iter()
        .map(|tag| TestFunctionSuite::new(tag, shape, cfg.test_point_count(shape)).stage("suites"))
        .collect()
}

/// Expectations of every suite function under the reference draws.
pub fn reference_expectations(
    suites: &[TestFunctionSuite],
    shape: ParamShape,
    reference: &Draws,
    points: Option<&Matrix>,
) -> Result<Vec<Vec<f64>>> {
    suites
        .iter()
        .map(|s| estimate_expectations(reference, shape, s, points).stage("reference expectations"))
        .collect()
}

/// One report per (algorithm, suite); comembership is trimmed jointly
/// across algorithms when `trim_fraction` is set.
pub fn evaluate_k(
    cfg: &ExperimentConfig,
    k: usize,
    suites: &[TestFunctionSuite],
    references: &[Vec<f64>],
    aggregated: &[(Algorithm, AggregatedSampleSet)],
    points: Option<&Matrix>,
) -> Result<Vec<EvaluationReport>> {
    let stage = format!("evaluation K={k}");
    let mut reports = Vec::new();
    for (suite, reference) in suites.iter().zip(references) {
        let estimates: Vec<Vec<f64>> = aggregated
            .iter()
            .map(|(_, agg)| estimate_expectations(&agg.draws, agg.shape, suite, points).stage(&stage))
            .collect::<Result<_>>()?;
        let mask = match (suite.tag(), cfg.evaluation.trim_fraction) {
            (SuiteTag::Comembership, Some(fraction)) => {
                let errors: Vec<Vec<Option<f64>>> = estimates
                    .iter()
                    .map(|e| e.iter().zip(reference).map(|(&a, &r)| vcmc::evaluation::relative_error(a, r).ok()).collect())
                    .collect();
                Some(joint_trim_mask(&errors, fraction).stage(&stage)?)
            }
            _ => None,
        };
        for ((alg, _), est) in aggregated.iter().zip(&estimates) {
            reports.push(EvaluationReport::new(*alg, suite, Some(k), est, reference, mask.as_deref()).stage(&stage)?);
        }
    }
    Ok(reports)
}

#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StageTimings {
    pub sampling: f64,
    pub optimization: f64,
    pub aggregation: f64,
    pub evaluation: f64,
}

#[derive(Debug, Clone)]
pub struct KRun {
    pub k: usize,
    pub samples: SubposteriorSampleSet,
    pub weights: Vec<(Algorithm, WeightSet)>,
    pub trace: Option<OptimizerTrace>,
    pub aggregated: Vec<(Algorithm, AggregatedSampleSet)>,
    pub reports: Vec<EvaluationReport>,
    pub timings: StageTimings,
}

impl KRun {
    pub fn report(&self, algorithm: Algorithm, suite: SuiteTag) -> Option<&EvaluationReport> {
        self.reports.iter().find(|r| r.algorithm == algorithm && r.suite == suite)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub model: ModelSpec,
    pub reference: SubposteriorSampleSet,
    pub reference_seconds: f64,
    pub test_points: Option<Matrix>,
    pub runs: Vec<KRun>,
}

impl ExperimentResult {
    pub fn run(&self, k: usize) -> Option<&KRun> {
        self.runs.iter().find(|r| r.k == k)
    }
}

type Weighed = (Vec<(Algorithm, WeightSet)>, Option<OptimizerTrace>, Vec<(Algorithm, AggregatedSampleSet)>);

/// Weights and aggregation for every configured algorithm on one sample set.
pub fn weigh_and_aggregate(
    cfg: &ExperimentConfig,
    model: &ModelSpec,
    samples: &SubposteriorSampleSet,
    timings: &mut StageTimings,
) -> Result<Weighed> {
    let k = samples.k();
    let mut weights = Vec::new();
    let mut trace = None;
    for &alg in &cfg.algorithms {
        let start = Instant::now();
        let w = if alg == Algorithm::Vcmc {
            let (w, t) = vcmc_weights(cfg, model, samples)?;
            trace = Some(t);
            timings.optimization += start.elapsed().as_secs_f64();
            w
        } else {
            let w = baseline_weights(alg, samples)?;
            timings.aggregation += start.elapsed().as_secs_f64();
            w
        };
        weights.push((alg, w));
    }
    let start = Instant::now();
    let aggregated = weights
        .iter()
        .map(|(alg, w)| Ok((*alg, aggregate(w, samples).stage(format!("aggregation {} K={k}", alg.as_str()))?)))
        .collect::<Result<Vec<_>>>()?;
    timings.aggregation += start.elapsed().as_secs_f64();
    Ok((weights, trace, aggregated))
}

/// Serial reference, then for each `K`: sampling, weights, aggregation and
/// evaluation.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let model = build_model(cfg)?;
    let shape = model.shape();
    let points = test_points(cfg, &model)?;
    let suites = suites(cfg, shape)?;
    let start = Instant::now();
    let reference = sample_reference(cfg, &model)?;
    let reference_seconds = start.elapsed().as_secs_f64();
    let refs = reference_expectations(&suites, shape, reference.partition(0), points.as_ref())?;
    let mut runs = Vec::new();
    for k in cfg.ks() {
        let mut timings = StageTimings::default();
        let start = Instant::now();
        let samples = sample_partitions(cfg, &model, k)?;
        timings.sampling = start.elapsed().as_secs_f64();
        let (weights, trace, aggregated) = weigh_and_aggregate(cfg, &model, &samples, &mut timings)?;
        let start = Instant::now();
        let reports = evaluate_k(cfg, k, &suites, &refs, &aggregated, points.as_ref())?;
        timings.evaluation = start.elapsed().as_secs_f64();
        runs.push(KRun {
            k,
            samples,
            weights,
            trace,
            aggregated,
            reports,
            timings,
        });
    }
    Ok(ExperimentResult {
        model,
        reference,
        reference_seconds,
        test_points: points,
        runs,
    })
}

/// Tempering mode of the serial reference.
pub fn reference_mode() -> TemperingMode {
    TemperingMode::Subposterior { k: 1 }
}
