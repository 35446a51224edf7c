//! Subcommands on top of [`crate::experiment`], reading and writing the
//! experiment directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use vcmc::aggregation::{AggregatedSampleSet, WeightSet};
use vcmc::evaluation::{Algorithm, EvaluationReport, SuiteTag};
use vcmc::models::{ModelSpec, TemperingMode};
use vcmc::samplers::io::{read_samples, write_samples, SampleFileHeader, SampleFormat};
use vcmc::samplers::SubposteriorSampleSet;
use vcmc::variational::OptimizerTrace;
use vcmc::{Draws, Error as CoreError, ParamShape};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result, StageContext};
use crate::experiment::{self, ExperimentResult, KRun, StageTimings};
use crate::output::{self, OutputDir, SampleRecord, REFERENCE_DIR};

/// Which chains `sample` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleTarget {
    Serial,
    Parallel,
    Both,
}

/// Resolved settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Context {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
    pub force: bool,
    pub dry_run: bool,
}

impl Context {
    /// Applies `--seed` and `--out` overrides.
    pub fn new(mut cfg: ExperimentConfig, seed: Option<u64>, out: Option<PathBuf>, force: bool, dry_run: bool) -> Result<Self> {
        if let Some(s) = seed {
            cfg.seed = s;
        }
        if let Some(o) = out {
            cfg.output.dir = o;
        }
        cfg.validate()?;
        Ok(Context {
            out: cfg.output.dir.clone(),
            cfg,
            force,
            dry_run,
        })
    }

    fn format(&self) -> SampleFormat {
        self.cfg.output.format
    }
}

fn plan(ctx: &Context, stages: &[String]) {
    println!("dry run: nothing will be written under {}", ctx.out.display());
    for (i, s) in stages.iter().enumerate() {
        println!("  {}. {s}", i + 1);
    }
}

fn ks_label(cfg: &ExperimentConfig) -> String {
    cfg.ks().iter().map(|k| k.to_string()).collect::<Vec<_>>().join(", ")
}

// ---- persistence -------------------------------------------------------

fn write_set(out: &mut OutputDir, dir: &str, model: &ModelSpec, set: &SubposteriorSampleSet, format: SampleFormat) -> Result<()> {
    for (kk, draws) in set.partitions().iter().enumerate() {
        let header = SampleFileHeader {
            model: model.tag(),
            d: model.shape().d(),
            partitions: set.k(),
            index: kk,
            draws: draws.len(),
            seed: set.seeds()[kk],
            dim: draws.dim(),
        };
        out.write_with(&output::part_file(dir, kk, format), |tmp| {
            write_samples(tmp, &header, draws, format).stage("write samples")
        })?;
    }
    Ok(())
}

fn record_set(out: &mut OutputDir, dir: &str, set: &SubposteriorSampleSet, seconds: f64) {
    out.manifest.samples.insert(
        dir.to_string(),
        SampleRecord {
            k: set.k(),
            t: set.t(),
            seeds: set.seeds().to_vec(),
            seconds,
        },
    );
}

fn write_weights(out: &mut OutputDir, k: usize, alg: Algorithm, w: &WeightSet) -> Result<()> {
    let json = w.to_json().stage("write weights")?;
    out.write_bytes(&output::weights_file(k, alg), json.as_bytes())
}

fn write_trace(out: &mut OutputDir, k: usize, trace: &OptimizerTrace) -> Result<()> {
    out.write_with(&output::trace_file(k), |tmp| {
        let f = fs::File::create(tmp).map_err(|e| CliError::io(tmp, e))?;
        trace.write_csv(f).stage("write trace")
    })
}

fn write_aggregated(out: &mut OutputDir, model: &ModelSpec, k: usize, alg: Algorithm, agg: &AggregatedSampleSet, format: SampleFormat) -> Result<()> {
    let header = SampleFileHeader {
        model: model.tag(),
        d: agg.shape.d(),
        partitions: k,
        index: 0,
        draws: agg.draws.len(),
        seed: agg.provenance.sample_set,
        dim: agg.draws.dim(),
    };
    out.write_with(&output::aggregated_file(k, alg, format), |tmp| {
        write_samples(tmp, &header, &agg.draws, format).stage("write aggregated samples")
    })
}

fn write_reports(out: &mut OutputDir, k: usize, reports: &[EvaluationReport]) -> Result<()> {
    for r in reports {
        let json = r.to_json().stage("write report")?;
        out.write_bytes(&output::report_file(k, r.algorithm, r.suite, "json"), json.as_bytes())?;
        let mut csv = Vec::new();
        r.write_csv(&mut csv, true).stage("write report")?;
        out.write_bytes(&output::report_file(k, r.algorithm, r.suite, "csv"), &csv)?;
    }
    Ok(())
}

/// Median cell text, shared by the writer and the validator.
pub fn cell(median: f64) -> String {
    format!("{median:?}")
}

/// `K` on rows, algorithms on columns, median error in the cells.
pub fn comparison_table(suite: SuiteTag, algorithms: &[Algorithm], per_k: &[(usize, Vec<EvaluationReport>)]) -> String {
    let mut s = String::from("K");
    for a in algorithms {
        s.push(',');
        s.push_str(a.as_str());
    }
    s.push('\n');
    for (k, reports) in per_k {
        s.push_str(&k.to_string());
        for a in algorithms {
            s.push(',');
            if let Some(r) = reports.iter().find(|r| r.algorithm == *a && r.suite == suite) {
                s.push_str(&cell(r.median));
            }
        }
        s.push('\n');
    }
    s
}

fn write_comparisons(out: &mut OutputDir, cfg: &ExperimentConfig, per_k: &[(usize, Vec<EvaluationReport>)]) -> Result<()> {
    for suite in cfg.suites() {
        let table = comparison_table(suite, &cfg.algorithms, per_k);
        out.write_bytes(&output::comparison_file(suite), table.as_bytes())?;
    }
    Ok(())
}

fn record_timings(out: &mut OutputDir, k: usize, t: &StageTimings) {
    let dir = output::k_dir(k);
    for (name, secs) in [
        ("sampling", t.sampling),
        ("optimization", t.optimization),
        ("aggregation", t.aggregation),
        ("evaluation", t.evaluation),
    ] {
        if secs > 0.0 {
            out.manifest.stages.insert(format!("{dir}/{name}"), secs);
        }
    }
}

/// Writes everything [`experiment::run_experiment`] produced.
pub fn persist_experiment(out: &mut OutputDir, ctx: &Context, result: &ExperimentResult) -> Result<()> {
    let format = ctx.format();
    write_set(out, REFERENCE_DIR, &result.model, &result.reference, format)?;
    record_set(out, REFERENCE_DIR, &result.reference, result.reference_seconds);
    let mut per_k = Vec::new();
    for run in &result.runs {
        persist_run(out, &result.model, run, format)?;
        per_k.push((run.k, run.reports.clone()));
    }
    write_comparisons(out, &ctx.cfg, &per_k)
}

fn persist_run(out: &mut OutputDir, model: &ModelSpec, run: &KRun, format: SampleFormat) -> Result<()> {
    let dir = output::samples_dir(run.k);
    write_set(out, &dir, model, &run.samples, format)?;
    record_set(out, &dir, &run.samples, run.timings.sampling);
    for (alg, w) in &run.weights {
        write_weights(out, run.k, *alg, w)?;
    }
    if let Some(t) = &run.trace {
        write_trace(out, run.k, t)?;
    }
    for (alg, agg) in &run.aggregated {
        write_aggregated(out, model, run.k, *alg, agg, format)?;
    }
    write_reports(out, run.k, &run.reports)?;
    record_timings(out, run.k, &run.timings);
    Ok(())
}

// ---- loading -----------------------------------------------------------

fn missing(path: &Path, hint: &str) -> CliError {
    CliError::Invalid(format!("{} not found; {hint}", path.display()))
}

/// Reads `K` partition files and checks them against the model.
pub fn read_set(root: &Path, dir: &str, model: &ModelSpec, k: usize, mode: TemperingMode, format: SampleFormat) -> Result<SubposteriorSampleSet> {
    let shape = model.shape();
    let mut parts = Vec::with_capacity(k);
    let mut seeds = Vec::with_capacity(k);
    for kk in 0..k {
        let path = root.join(output::part_file(dir, kk, format));
        if !path.exists() {
            return Err(missing(&path, "run `sample` first"));
        }
        let (h, draws) = read_samples(&path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        check_header(&path, &h, model.tag(), shape, k, kk)?;
        if let Some(first) = parts.first() {
            let first: &Draws = first;
            if first.len() != draws.len() {
                return Err(CliError::Invalid(format!(
                    "{}: {} draws but partition 0 has {}",
                    path.display(),
                    draws.len(),
                    first.len()
                )));
            }
        }
        seeds.push(h.seed);
        parts.push(draws);
    }
    SubposteriorSampleSet::new(shape, mode, parts, seeds).stage(format!("read {dir}"))
}

fn check_header(path: &Path, h: &SampleFileHeader, tag: vcmc::models::ModelTag, shape: ParamShape, k: usize, index: usize) -> Result<()> {
    let ok = h.model == tag && h.dim == shape.flat_len() && h.d == shape.d() && h.partitions == k && h.index == index;
    if ok {
        Ok(())
    } else {
        Err(CliError::Invalid(format!(
            "{}: header {:?} does not match a {} model with shape {:?}, K={k}, partition {index}",
            path.display(),
            h,
            tag.as_str(),
            shape
        )))
    }
}

fn read_weights(root: &Path, k: usize, alg: Algorithm, shape: ParamShape) -> Result<WeightSet> {
    let path = root.join(output::weights_file(k, alg));
    let text = fs::read_to_string(&path).map_err(|_| missing(&path, "run `optimize` first"))?;
    let w = WeightSet::from_json(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    w.check_shape(shape).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    if w.k() != k {
        return Err(CliError::Invalid(format!("{}: weights for K={} found in the K={k} directory", path.display(), w.k())));
    }
    Ok(w)
}

fn read_aggregated(root: &Path, model: &ModelSpec, k: usize, alg: Algorithm, format: SampleFormat) -> Result<AggregatedSampleSet> {
    let path = root.join(output::aggregated_file(k, alg, format));
    if !path.exists() {
        return Err(missing(&path, "run `aggregate` first"));
    }
    let (h, draws) = read_samples(&path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    check_header(&path, &h, model.tag(), model.shape(), k, 0)?;
    Ok(AggregatedSampleSet {
        shape: model.shape(),
        draws,
        provenance: vcmc::aggregation::Provenance {
            weight_set: 0,
            sample_set: h.seed,
        },
    })
}

// ---- subcommands ---------------------------------------------------------

pub fn cmd_sample(ctx: &Context, target: SampleTarget) -> Result<()> {
    let cfg = &ctx.cfg;
    let serial = target != SampleTarget::Parallel;
    let parallel = target != SampleTarget::Serial;
    if ctx.dry_run {
        let mut stages = vec!["build model".to_string()];
        if serial {
            stages.push(format!("serial reference, T = {}", experiment::reference_config(cfg).draw_count()));
        }
        if parallel {
            stages.push(format!("parallel sampling for K in [{}], T = {}", ks_label(cfg), cfg.sampler.draw_count()));
        }
        plan(ctx, &stages);
        return Ok(());
    }
    let model = experiment::build_model(cfg)?;
    let mut out = OutputDir::open(&ctx.out, cfg, ctx.force)?;
    if serial {
        let start = Instant::now();
        let set = experiment::sample_reference(cfg, &model)?;
        write_set(&mut out, REFERENCE_DIR, &model, &set, ctx.format())?;
        record_set(&mut out, REFERENCE_DIR, &set, start.elapsed().as_secs_f64());
        eprintln!("serial reference: {} draws", set.t());
    }
    if parallel {
        for k in cfg.ks() {
            let start = Instant::now();
            let set = experiment::sample_partitions(cfg, &model, k)?;
            let secs = start.elapsed().as_secs_f64();
            let dir = output::samples_dir(k);
            write_set(&mut out, &dir, &model, &set, ctx.format())?;
            record_set(&mut out, &dir, &set, secs);
            out.manifest.stages.insert(format!("{}/sampling", output::k_dir(k)), secs);
            eprintln!("K={k}: {} partitions x {} draws", set.k(), set.t());
        }
    }
    out.finish()
}

fn load_samples(ctx: &Context, model: &ModelSpec, k: usize) -> Result<SubposteriorSampleSet> {
    read_set(&ctx.out, &output::samples_dir(k), model, k, ctx.cfg.tempering.mode(k), ctx.format())
}

pub fn cmd_optimize(ctx: &Context) -> Result<()> {
    let cfg = &ctx.cfg;
    if !cfg.algorithms.contains(&Algorithm::Vcmc) {
        eprintln!("vcmc is not among the configured algorithms; nothing to optimize");
        return Ok(());
    }
    if ctx.dry_run {
        plan(ctx, &[format!("optimize weights for K in [{}], {} iterations each", ks_label(cfg), cfg.objective.iterations)]);
        return Ok(());
    }
    let model = experiment::build_model(cfg)?;
    let mut out = OutputDir::open(&ctx.out, cfg, ctx.force)?;
    for k in cfg.ks() {
        let samples = load_samples(ctx, &model, k)?;
        let start = Instant::now();
        match experiment::vcmc_weights(cfg, &model, &samples) {
            Ok((w, trace)) => {
                out.manifest.stages.insert(format!("{}/optimization", output::k_dir(k)), start.elapsed().as_secs_f64());
                write_weights(&mut out, k, Algorithm::Vcmc, &w)?;
                write_trace(&mut out, k, &trace)?;
                eprintln!("K={k}: final objective {:.6}", trace.rows.last().map_or(f64::NAN, |r| r.objective));
            }
            Err(CliError::Stage {
                stage,
                source: CoreError::OptimizerAborted { iteration, reason, trace },
            }) => {
                write_trace(&mut out, k, &trace)?;
                out.finish()?;
                return Err(CliError::Stage {
                    stage,
                    source: CoreError::OptimizerAborted { iteration, reason, trace },
                });
            }
            Err(e) => return Err(e),
        }
    }
    out.finish()
}

pub fn cmd_aggregate(ctx: &Context) -> Result<()> {
    let cfg = &ctx.cfg;
    if ctx.dry_run {
        let algs: Vec<_> = cfg.algorithms.iter().map(Algorithm::as_str).collect();
        plan(ctx, &[format!("aggregate [{}] for K in [{}]", algs.join(", "), ks_label(cfg))]);
        return Ok(());
    }
    let model = experiment::build_model(cfg)?;
    let mut out = OutputDir::open(&ctx.out, cfg, ctx.force)?;
    for k in cfg.ks() {
        let samples = load_samples(ctx, &model, k)?;
        let start = Instant::now();
        for &alg in &cfg.algorithms {
            let w = if alg == Algorithm::Vcmc {
                read_weights(&ctx.out, k, alg, model.shape())?
            } else {
                let w = experiment::baseline_weights(alg, &samples)?;
                write_weights(&mut out, k, alg, &w)?;
                w
            };
            let agg = vcmc::aggregation::aggregate(&w, &samples).stage(format!("aggregation {} K={k}", alg.as_str()))?;
            write_aggregated(&mut out, &model, k, alg, &agg, ctx.format())?;
        }
        out.manifest.stages.insert(format!("{}/aggregation", output::k_dir(k)), start.elapsed().as_secs_f64());
    }
    out.finish()
}

pub fn cmd_evaluate(ctx: &Context) -> Result<()> {
    let cfg = &ctx.cfg;
    if ctx.dry_run {
        let suites: Vec<_> = cfg.suites().iter().map(SuiteTag::as_str).collect();
        plan(
            ctx,
            &[
                format!("evaluate suites [{}] against the serial reference", suites.join(", ")),
                format!("{} reports per K for K in [{}]", suites.len() * cfg.algorithms.len(), ks_label(cfg)),
                "comparison tables".to_string(),
            ],
        );
        return Ok(());
    }
    let model = experiment::build_model(cfg)?;
    let shape = model.shape();
    let reference = read_set(&ctx.out, REFERENCE_DIR, &model, 1, experiment::reference_mode(), ctx.format())
        .map_err(|e| match e {
            CliError::Invalid(m) => CliError::Invalid(format!("missing serial reference: {m}")),
            other => other,
        })?;
    let points = experiment::test_points(cfg, &model)?;
    let suites = experiment::suites(cfg, shape)?;
    let refs = experiment::reference_expectations(&suites, shape, reference.partition(0), points.as_ref())?;
    let mut out = OutputDir::open(&ctx.out, cfg, ctx.force)?;
    let mut per_k = Vec::new();
    for k in cfg.ks() {
        let start = Instant::now();
        let aggregated = cfg
            .algorithms
            .iter()
            .map(|&alg| Ok((alg, read_aggregated(&ctx.out, &model, k, alg, ctx.format())?)))
            .collect::<Result<Vec<_>>>()?;
        let reports = experiment::evaluate_k(cfg, k, &suites, &refs, &aggregated, points.as_ref())?;
        write_reports(&mut out, k, &reports)?;
        out.manifest.stages.insert(format!("{}/evaluation", output::k_dir(k)), start.elapsed().as_secs_f64());
        per_k.push((k, reports));
    }
    write_comparisons(&mut out, cfg, &per_k)?;
    out.finish()
}

pub fn cmd_pipeline(ctx: &Context) -> Result<()> {
    let cfg = &ctx.cfg;
    if ctx.dry_run {
        let algs: Vec<_> = cfg.algorithms.iter().map(Algorithm::as_str).collect();
        let suites: Vec<_> = cfg.suites().iter().map(SuiteTag::as_str).collect();
        plan(
            ctx,
            &[
                "build model".to_string(),
                format!("serial reference, T = {}", experiment::reference_config(cfg).draw_count()),
                format!("parallel sampling for K in [{}], T = {}", ks_label(cfg), cfg.sampler.draw_count()),
                format!("weights and aggregation for [{}]", algs.join(", ")),
                format!("evaluation of [{}]", suites.join(", ")),
                format!("write results to {}", ctx.out.display()),
            ],
        );
        return Ok(());
    }
    if output::is_nonempty(&ctx.out) {
        if !ctx.force {
            return Err(CliError::Exists(ctx.out.clone()));
        }
        output::clear_generated(&ctx.out)?;
    }
    let start = Instant::now();
    let result = experiment::run_experiment(cfg)?;
    let mut out = OutputDir::open(&ctx.out, cfg, ctx.force)?;
    persist_experiment(&mut out, ctx, &result)?;
    out.manifest.stages.insert("reference/sampling".into(), result.reference_seconds);
    out.manifest.stages.insert("total".into(), start.elapsed().as_secs_f64());
    out.finish()?;
    for run in &result.runs {
        for r in &run.reports {
            eprintln!("K={:<4} {:<14} {:<22} median {:.4e}", run.k, r.algorithm.as_str(), r.suite.as_str(), r.median);
        }
    }
    Ok(())
}

// ---- validation ------------------------------------------------------------

/// Re-checks a finished experiment directory; returns the number of files
/// checked or every problem found.
pub fn cmd_validate(root: &Path) -> Result<usize> {
    let manifest = output::Manifest::load(root)?;
    let cfg_path = root.join(output::CONFIG_COPY);
    let text = fs::read_to_string(&cfg_path).map_err(|e| CliError::io(&cfg_path, e))?;
    let cfg = ExperimentConfig::parse(&text, true).map_err(|e| CliError::Invalid(format!("{}: {e}", cfg_path.display())))?;
    let mut problems = Vec::new();
    if cfg.hash() != manifest.config_hash {
        problems.push(format!("config hash {} does not match the manifest's {}", cfg.hash(), manifest.config_hash));
    }
    let draws = cfg.sampler.draw_count();
    let reference_draws = experiment::reference_config(&cfg).draw_count();
    let mut medians = std::collections::BTreeMap::new();
    for (rel, rec) in &manifest.files {
        let path = root.join(rel);
        match output::sha256_file(&path) {
            Ok(h) if h == rec.sha256 => {}
            Ok(_) => problems.push(format!("{rel}: content differs from the manifest")),
            Err(e) => {
                problems.push(format!("{rel}: {e}"));
                continue;
            }
        }
        if let Err(msg) = validate_file(rel, &path, &cfg, draws, reference_draws, &mut medians) {
            problems.push(format!("{rel}: {msg}"));
        }
    }
    for suite in cfg.suites() {
        let rel = output::comparison_file(suite);
        if !manifest.files.contains_key(&rel) {
            continue;
        }
        if let Err(msg) = validate_comparison(&root.join(&rel), suite, &cfg, &medians) {
            problems.push(format!("{rel}: {msg}"));
        }
    }
    if problems.is_empty() {
        Ok(manifest.files.len())
    } else {
        Err(CliError::Invalid(format!("{} problem(s):\n  {}", problems.len(), problems.join("\n  "))))
    }
}

type Medians = std::collections::BTreeMap<(usize, &'static str, &'static str), f64>;

fn validate_file(rel: &str, path: &Path, cfg: &ExperimentConfig, draws: usize, reference_draws: usize, medians: &mut Medians) -> std::result::Result<(), String> {
    let ext = Path::new(rel).extension().and_then(|e| e.to_str()).unwrap_or("");
    let is_samples = rel.contains("/samples/") || rel.starts_with("reference/") || rel.contains("/aggregated/");
    if is_samples {
        let (h, d) = read_samples(path).map_err(|e| e.to_string())?;
        let expected = if rel.starts_with("reference/") { reference_draws } else { draws };
        if h.draws != expected || d.len() != expected {
            return Err(format!("{} draws, expected {expected}", d.len()));
        }
        if h.model != cfg.model.tag() {
            return Err(format!("model tag {} does not match the config", h.model.as_str()));
        }
        return Ok(());
    }
    if rel.contains("/weights/") {
        let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
        WeightSet::from_json(&text).map_err(|e| e.to_string())?;
        return Ok(());
    }
    if rel.contains("/reports/") && ext == "json" {
        let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
        let r: EvaluationReport = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        if !(0.0 <= r.q1 && r.q1 <= r.median && r.median <= r.q3) {
            return Err(format!("quartiles out of order: {} / {} / {}", r.q1, r.median, r.q3));
        }
        if r.n_functions == 0 {
            return Err("every function is excluded".into());
        }
        let k = r.k.ok_or("report has no K")?;
        medians.insert((k, r.algorithm.as_str(), r.suite.as_str()), r.median);
    }
    Ok(())
}

fn validate_comparison(path: &Path, suite: SuiteTag, cfg: &ExperimentConfig, medians: &Medians) -> std::result::Result<(), String> {
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or("empty table")?.split(',').collect();
    let expected: Vec<&str> = std::iter::once("K").chain(cfg.algorithms.iter().map(Algorithm::as_str)).collect();
    if header != expected {
        return Err(format!("header {header:?}, expected {expected:?}"));
    }
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let k: usize = cells[0].parse().map_err(|_| format!("bad K `{}`", cells[0]))?;
        for (alg, c) in cfg.algorithms.iter().zip(&cells[1..]) {
            match medians.get(&(k, alg.as_str(), suite.as_str())) {
                Some(&m) if cell(m) == *c => {}
                Some(&m) => return Err(format!("K={k} {}: cell {c} but report median {}", alg.as_str(), cell(m))),
                None => return Err(format!("K={k} {}: no matching report", alg.as_str())),
            }
        }
    }
    Ok(())
}
