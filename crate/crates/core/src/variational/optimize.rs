use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{BatchSampler, Objective, ObjectiveConfig, SampleBatch};
use crate::aggregation::{project_to_floored_simplex, WeightSet};
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::samplers::SubposteriorSampleSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    /// Batch estimate at the iterate before the step.
    pub objective: f64,
    pub grad_norm: f64,
    pub step: f64,
    /// Wall time since the optimizer started.
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OptimizerTrace {
    pub rows: Vec<TraceRow>,
}

impl OptimizerTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
        }
        if self.rows.is_empty() {
            out.write_record(["iteration", "objective", "grad_norm", "step", "seconds"])
                .map_err(|e| Error::Format(e.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Projects every `(ℓ, j)` column of raw values onto the floored simplex.
pub fn project_weights(raw: &WeightSet, floor: f64) -> Result<WeightSet> {
    let (k, cols) = (raw.k(), raw.block_len());
    let mut values = vec![0.0; k * cols];
    let mut column = vec![0.0; k];
    for c in 0..cols {
        for (kk, v) in column.iter_mut().enumerate() {
            *v = raw.values()[kk * cols + c];
        }
        for (kk, v) in project_to_floored_simplex(&column, floor)?.into_iter().enumerate() {
            values[kk * cols + c] = v;
        }
    }
    let w = raw.with_values(values)?;
    w.validate(floor)?;
    Ok(w)
}

/// Projected stochastic gradient ascent from uniform weights (aligned
/// first for mixtures).
pub fn optimize(
    model: &ModelSpec,
    samples: &SubposteriorSampleSet,
    cfg: &ObjectiveConfig,
    seed: u64,
) -> Result<(WeightSet, OptimizerTrace)> {
    cfg.validate()?;
    let objective = Objective::new(model, samples, cfg)?;
    let init = objective.initial_weights(samples)?;
    optimize_from(&objective, samples, init, cfg, seed)
}

/// Projected stochastic gradient ascent from a given feasible start.
pub fn optimize_from(
    objective: &Objective<'_>,
    samples: &SubposteriorSampleSet,
    init: WeightSet,
    cfg: &ObjectiveConfig,
    seed: u64,
) -> Result<(WeightSet, OptimizerTrace)> {
    cfg.validate()?;
    init.validate(cfg.weight_floor)?;
    let start = Instant::now();
    let mut sampler = BatchSampler::new(samples.t(), seed)?;
    let mut weights = init;
    let mut trace = OptimizerTrace::default();
    for it in 1..=cfg.iterations {
        let idx = sampler.next_indices(cfg.batch_size);
        let batch = SampleBatch::from_indices(samples, &idx)?;
        let step = cfg.step(it);
        let (value, grad) = objective.value_and_grad(&weights, &batch)?;
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        trace.rows.push(TraceRow {
            iteration: it,
            objective: value,
            grad_norm,
            step,
            seconds: start.elapsed().as_secs_f64(),
        });
        if !value.is_finite() || !grad_norm.is_finite() {
            return Err(Error::OptimizerAborted {
                iteration: it,
                reason: format!("non-finite objective {value} or gradient norm {grad_norm}"),
                trace,
            });
        }
        let raw: Vec<f64> = weights.values().iter().zip(&grad).map(|(w, g)| w + step * g).collect();
        weights = project_weights(&weights.with_values(raw)?, cfg.weight_floor)?;
    }
    Ok((weights, trace))
}
