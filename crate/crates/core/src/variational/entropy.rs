use super::EntropyMode;
use crate::aggregation::WeightSet;
use crate::error::{Error, Result};

fn log_dets(weights: &WeightSet) -> Result<Vec<f64>> {
    if let Some(v) = weights.values().iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::domain(format!("relaxed entropy needs positive weights, found {v}")));
    }
    Ok((0..weights.k())
        .map(|k| weights.partition(k).iter().map(|w| w.ln()).sum())
        .collect())
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate() {
        if *x > xs[best] {
            best = i;
        }
    }
    best
}

/// Relaxed entropy of the aggregated distribution, without the constant
/// `min_k H[p_k]`.
pub fn relaxed_entropy(weights: &WeightSet, mode: EntropyMode) -> Result<f64> {
    let ld = log_dets(weights)?;
    Ok(match mode {
        EntropyMode::RelaxedMean => ld.iter().sum::<f64>() / ld.len() as f64,
        EntropyMode::RelaxedMax => ld[argmax(&ld)],
    })
}

/// Gradient of [`relaxed_entropy`] in weight layout; the max mode returns
/// the gradient of the first maximizing block.
pub fn relaxed_entropy_grad(weights: &WeightSet, mode: EntropyMode) -> Result<Vec<f64>> {
    let ld = log_dets(weights)?;
    let k = weights.k();
    let n = weights.block_len();
    let mut g = vec![0.0; weights.values().len()];
    match mode {
        EntropyMode::RelaxedMean => {
            for (gi, w) in g.iter_mut().zip(weights.values()) {
                *gi = 1.0 / (k as f64 * w);
            }
        }
        EntropyMode::RelaxedMax => {
            let best = argmax(&ld);
            for (gi, w) in g[best * n..(best + 1) * n].iter_mut().zip(weights.partition(best)) {
                *gi = 1.0 / w;
            }
        }
    }
    Ok(g)
}
