use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Chain length, thinning and HMC settings shared by all samplers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub step_size: f64,
    pub leapfrog_steps: usize,
    /// Halve the HMC step until warmup acceptance reaches 0.6.
    pub tune_step: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            iterations: 5100,
            burn_in: 100,
            thin: 5,
            seed: 0,
            step_size: 0.05,
            leapfrog_steps: 10,
            tune_step: true,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations <= self.burn_in {
            return Err(Error::config(format!(
                "iterations ({}) must exceed burn-in ({})",
                self.iterations, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::config("thinning stride must be >= 1"));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::config("HMC step size must be positive"));
        }
        if self.leapfrog_steps == 0 {
            return Err(Error::config("HMC needs at least one leapfrog step"));
        }
        Ok(())
    }

    /// Number of retained draws: `ceil((iterations - burn_in) / thin)`.
    pub fn draw_count(&self) -> usize {
        (self.iterations - self.burn_in).div_ceil(self.thin)
    }

    /// Whether iteration `it` (0-based) is kept.
    pub fn keeps(&self, it: usize) -> bool {
        it >= self.burn_in && (it - self.burn_in).is_multiple_of(self.thin)
    }
}
