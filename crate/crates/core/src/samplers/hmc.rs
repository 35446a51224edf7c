//! Fixed-step Hamiltonian Monte Carlo with an identity mass matrix.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::parallel::{ChainDiagnostics, ChainOutput};
use super::{DataPartition, SamplerConfig};
use crate::draws::Draws;
use crate::error::{Error, Result};
use crate::models::{MixtureModel, TemperingMode};
use crate::rng::rng_from_seed;

const WARMUP_STEPS: usize = 100;
const TARGET_ACCEPT: f64 = 0.6;
const MAX_HALVINGS: usize = 30;

/// End state of a leapfrog trajectory.
#[derive(Debug, Clone)]
pub struct HmcTrajectory {
    pub position: Vec<f64>,
    pub momentum: Vec<f64>,
    pub log_density: f64,
    /// `H(end) - H(start)` with `H = -log π + |p|²/2`.
    pub energy_change: f64,
}

fn kinetic(p: &[f64]) -> f64 {
    0.5 * p.iter().map(|x| x * x).sum::<f64>()
}

fn check_finite(value: f64, grad: &[f64], at: &[f64]) -> Result<()> {
    if value.is_finite() && grad.iter().all(|g| g.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(format!(
            "log density {value} or its gradient is not finite at |θ|∞ = {:.3e}",
            at.iter().fold(0.0_f64, |a, b| a.max(b.abs()))
        )))
    }
}

/// Runs `steps` leapfrog steps in place. `grad` must hold the gradient at
/// `q` on entry and holds the gradient at the new `q` on exit.
fn leapfrog<F>(target: &mut F, q: &mut [f64], p: &mut [f64], grad: &mut [f64], eps: f64, steps: usize) -> Result<f64>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<f64>,
{
    let mut value = f64::NAN;
    for _ in 0..steps {
        p.iter_mut().zip(grad.iter()).for_each(|(pi, g)| *pi += 0.5 * eps * g);
        q.iter_mut().zip(p.iter()).for_each(|(qi, pi)| *qi += eps * pi);
        value = target(q, grad)?;
        check_finite(value, grad, q)?;
        p.iter_mut().zip(grad.iter()).for_each(|(pi, g)| *pi += 0.5 * eps * g);
    }
    Ok(value)
}

/// Integrates one trajectory from `(position, momentum)` and reports the
/// energy error.
pub fn leapfrog_energy_error<F>(mut target: F, position: &[f64], momentum: &[f64], eps: f64, steps: usize) -> Result<HmcTrajectory>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<f64>,
{
    let mut q = position.to_vec();
    let mut p = momentum.to_vec();
    let mut grad = vec![0.0; q.len()];
    let start = target(&q, &mut grad)?;
    check_finite(start, &grad, &q)?;
    let h0 = -start + kinetic(&p);
    let end = leapfrog(&mut target, &mut q, &mut p, &mut grad, eps, steps)?;
    let h1 = -end + kinetic(&p);
    Ok(HmcTrajectory {
        position: q,
        momentum: p,
        log_density: end,
        energy_change: h1 - h0,
    })
}

struct Chain<F> {
    target: F,
    q: Vec<f64>,
    grad: Vec<f64>,
    value: f64,
}

impl<F> Chain<F>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<f64>,
{
    fn new(mut target: F, init: Vec<f64>) -> Result<Self> {
        let mut grad = vec![0.0; init.len()];
        let value = target(&init, &mut grad)?;
        check_finite(value, &grad, &init)?;
        Ok(Chain { target, q: init, grad, value })
    }

    fn step<R: Rng + ?Sized>(&mut self, eps: f64, steps: usize, rng: &mut R) -> Result<bool> {
        let mut p: Vec<f64> = (0..self.q.len()).map(|_| StandardNormal.sample(rng)).collect();
        let h0 = -self.value + kinetic(&p);
        let mut q = self.q.clone();
        let mut grad = self.grad.clone();
        let value = leapfrog(&mut self.target, &mut q, &mut p, &mut grad, eps, steps)?;
        let h1 = -value + kinetic(&p);
        let log_u = rng.random::<f64>().ln();
        if log_u < h0 - h1 {
            self.q = q;
            self.grad = grad;
            self.value = value;
            Ok(true)
        } else {
            Ok(false)
        }
    }
}

/// HMC over the `L×d` mixture centers with assignments marginalized out.
///
/// Starts at the tempered-prior mean (all centers at the origin). With
/// `cfg.tune_step` the step size is halved until a 100-step warmup reaches
/// acceptance 0.6; warmup transitions are discarded.
pub fn hmc_mixture(
    model: &MixtureModel,
    partition: &DataPartition,
    mode: TemperingMode,
    cfg: &SamplerConfig,
    seed: u64,
) -> Result<ChainOutput> {
    cfg.validate()?;
    mode.validate()?;
    let rows = partition.rows();
    crate::models::check_rows(Some(rows), model.len())?;
    let power = mode.prior_power();
    let dim = model.clusters() * model.dim();
    let target = |q: &[f64], g: &mut [f64]| model.log_density_and_grad(q, rows, power, g);
    let mut chain = Chain::new(target, vec![0.0; dim])?;
    let mut rng = rng_from_seed(seed);

    let mut eps = cfg.step_size;
    if cfg.tune_step {
        for _ in 0..MAX_HALVINGS {
            let mut accepted = 0;
            for _ in 0..WARMUP_STEPS {
                accepted += usize::from(chain.step(eps, cfg.leapfrog_steps, &mut rng)?);
            }
            if accepted as f64 / WARMUP_STEPS as f64 >= TARGET_ACCEPT {
                break;
            }
            eps *= 0.5;
        }
    }

    let mut draws = Draws::with_capacity(dim, cfg.draw_count());
    let mut accepted = 0usize;
    for it in 0..cfg.iterations {
        accepted += usize::from(chain.step(eps, cfg.leapfrog_steps, &mut rng)?);
        if cfg.keeps(it) {
            draws.push(&chain.q)?;
        }
    }
    Ok(ChainOutput {
        draws,
        diagnostics: ChainDiagnostics {
            acceptance_rate: Some(accepted as f64 / cfg.iterations as f64),
            step_size: Some(eps),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn gaussian_mean_model(n: usize, seed: u64) -> MixtureModel {
        let mut rng = rng_from_seed(seed);
        let x = Matrix::from_fn(n, 1, |_, _| 1.5 + rng.sample::<f64, _>(StandardNormal));
        MixtureModel::new(1, 4.0, 1.0, vec![1.0], x).unwrap()
    }

    #[test]
    fn tiny_steps_always_accept() {
        let model = gaussian_mean_model(20, 1);
        let cfg = SamplerConfig {
            iterations: 1000,
            burn_in: 0,
            thin: 1,
            step_size: 1e-8,
            leapfrog_steps: 1,
            tune_step: false,
            seed: 0,
        };
        let out = hmc_mixture(&model, &DataPartition::full(20), TemperingMode::Subposterior { k: 1 }, &cfg, 5).unwrap();
        assert_eq!(out.diagnostics.acceptance_rate, Some(1.0));
    }

    #[test]
    fn single_gaussian_posterior_mean() {
        let n = 50;
        let model = gaussian_mean_model(n, 2);
        let cfg = SamplerConfig {
            iterations: 20_000,
            burn_in: 500,
            thin: 1,
            step_size: 0.1,
            leapfrog_steps: 5,
            tune_step: true,
            seed: 0,
        };
        let out = hmc_mixture(&model, &DataPartition::full(n), TemperingMode::Subposterior { k: 1 }, &cfg, 9).unwrap();
        let sum: f64 = model.data().iter().sum();
        let prec = 1.0 / model.prior_var() + n as f64 / model.lik_var();
        let post_mean = sum / model.lik_var() / prec;
        let xs: Vec<f64> = out.draws.rows().map(|r| r[0]).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        // successive draws are correlated; use batch means for the standard error
        let batches: Vec<f64> = xs.chunks(500).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
        let bm = batches.iter().sum::<f64>() / batches.len() as f64;
        let bvar = batches.iter().map(|b| (b - bm).powi(2)).sum::<f64>() / (batches.len() - 1) as f64;
        let se = (bvar / batches.len() as f64).sqrt();
        assert!((m - post_mean).abs() < 3.0 * se, "{m} vs {post_mean} (se {se})");
    }

    #[test]
    fn energy_error_is_second_order() {
        let mut rng = rng_from_seed(4);
        let x = Matrix::from_fn(40, 2, |i, _| (if i % 2 == 0 { 2.0 } else { -2.0 }) + 0.5 * rng.sample::<f64, _>(StandardNormal));
        let model = MixtureModel::new(2, 4.0, 1.0, vec![0.5, 0.5], x).unwrap();
        let rows: Vec<usize> = (0..40).collect();
        let q0 = vec![1.5, 1.8, -1.9, -2.2];
        let p0 = vec![0.3, -0.5, 0.8, 0.1];
        let err = |eps: f64, steps: usize| {
            leapfrog_energy_error(|q: &[f64], g: &mut [f64]| model.log_density_and_grad(q, &rows, 1.0, g), &q0, &p0, eps, steps)
                .unwrap()
                .energy_change
                .abs()
        };
        let coarse = err(0.01, 50);
        let fine = err(0.005, 100);
        let ratio = coarse / fine;
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn non_finite_gradient_aborts() {
        let target = |_: &[f64], g: &mut [f64]| {
            g[0] = f64::NAN;
            Ok(0.0)
        };
        assert!(matches!(leapfrog_energy_error(target, &[0.0], &[1.0], 0.1, 3), Err(Error::NonFinite(_))));
    }
}
