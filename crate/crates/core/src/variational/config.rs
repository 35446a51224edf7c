use serde::{Deserialize, Serialize};

use crate::aggregation::WEIGHT_FLOOR;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyMode {
    /// `(1/K) Σ_k log det W_k`; concave in `W`.
    #[default]
    RelaxedMean,
    /// `max_k log det W_k`; tighter but not concave.
    RelaxedMax,
}

/// Which mixture gradient the optimizer follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MogGradient {
    /// Exact derivative of the mixture objective.
    #[default]
    Exact,
    /// Responsibility term `γ(1−γ)e` in place of `γ(e − ē)`.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObjectiveConfig {
    pub entropy: EntropyMode,
    pub batch_size: usize,
    pub iterations: usize,
    /// Step size `η_t = step_a / (step_b + t)`.
    pub step_a: f64,
    pub step_b: f64,
    pub weight_floor: f64,
    pub mog_gradient: MogGradient,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        ObjectiveConfig {
            entropy: EntropyMode::RelaxedMean,
            batch_size: 40,
            iterations: 25,
            step_a: 0.1,
            step_b: 10.0,
            weight_floor: WEIGHT_FLOOR,
            mog_gradient: MogGradient::Exact,
        }
    }
}

impl ObjectiveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be at least 1"));
        }
        if !(self.step_a > 0.0 && self.step_a.is_finite()) {
            return Err(Error::config("step_a must be positive"));
        }
        if !(self.step_b >= 0.0 && self.step_b.is_finite()) {
            return Err(Error::config("step_b must be non-negative"));
        }
        if !(self.weight_floor > 0.0 && self.weight_floor < 1.0) {
            return Err(Error::config("weight_floor must lie in (0, 1)"));
        }
        Ok(())
    }

    /// `η_t` for `t = 1, 2, …`.
    pub fn step(&self, t: usize) -> f64 {
        self.step_a / (self.step_b + t as f64)
    }
}
