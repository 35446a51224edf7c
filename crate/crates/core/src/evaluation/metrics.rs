use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// References with magnitude below this are excluded from error summaries.
pub const NEAR_ZERO: f64 = 1e-12;

/// `|estimate − reference| / |reference|`.
pub fn relative_error(estimate: f64, reference: f64) -> Result<f64> {
    if reference.abs() < NEAR_ZERO {
        return Err(Error::NearZeroReference);
    }
    Ok((estimate - reference).abs() / reference.abs())
}

/// Linear-interpolation quantile (`h = (n−1)p`) of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub n_functions: usize,
    pub n_excluded: usize,
}

/// Median and quartiles of the retained (`Some`) errors.
pub fn summarize(errors: &[Option<f64>]) -> Result<Summary> {
    let mut kept: Vec<f64> = errors.iter().flatten().copied().collect();
    if kept.is_empty() {
        return Err(Error::domain("every test function was excluded"));
    }
    if let Some(bad) = kept.iter().find(|e| !e.is_finite()) {
        return Err(Error::NonFinite(format!("relative error {bad}")));
    }
    kept.sort_by(f64::total_cmp);
    Ok(Summary {
        median: quantile(&kept, 0.5),
        q1: quantile(&kept, 0.25),
        q3: quantile(&kept, 0.75),
        n_functions: kept.len(),
        n_excluded: errors.len() - kept.len(),
    })
}

/// Keeps the `fraction` of functions whose worst error across methods is
/// smallest; functions excluded for any method are dropped.
pub fn joint_trim_mask(errors_by_method: &[Vec<Option<f64>>], fraction: f64) -> Result<Vec<bool>> {
    let Some(first) = errors_by_method.first() else {
        return Err(Error::config("trimming needs at least one method"));
    };
    let n = first.len();
    for e in errors_by_method {
        Error::check_dim(n, e.len())?;
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::config("trim fraction must lie in (0, 1]"));
    }
    let mut worst: Vec<(usize, f64)> = (0..n)
        .filter_map(|i| {
            errors_by_method
                .iter()
                .map(|e| e[i])
                .try_fold(0.0_f64, |acc, e| e.map(|e| acc.max(e)))
                .map(|w| (i, w))
        })
        .collect();
    worst.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let keep = (worst.len() as f64 * fraction).ceil() as usize;
    let mut mask = vec![false; n];
    for &(i, _) in worst.iter().take(keep) {
        mask[i] = true;
    }
    Ok(mask)
}

/// Autocorrelation effective sample size with Geyer's initial positive
/// sequence truncation.
pub fn effective_sample_size(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return n as f64;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let var = c.iter().map(|x| x * x).sum::<f64>() / n as f64;
    if var == 0.0 {
        return n as f64;
    }
    let rho = |lag: usize| c[..n - lag].iter().zip(&c[lag..]).map(|(a, b)| a * b).sum::<f64>() / (n as f64 * var);
    let mut tau = -1.0;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = rho(lag) + rho(lag + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
    }
    n as f64 / tau.max(1.0 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn relative_error_cases() {
        assert_eq!(relative_error(1.0, 1.0).unwrap(), 0.0);
        assert!((relative_error(1.1, 1.0).unwrap() - 0.1).abs() < 1e-15);
        assert!(matches!(relative_error(1.0, 0.0), Err(Error::NearZeroReference)));
        let r = 3.7;
        assert!((relative_error(-r * 1.25, -r).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn summary_examples() {
        let s = summarize(&[Some(0.1)]).unwrap();
        assert_eq!((s.median, s.q1, s.q3), (0.1, 0.1, 0.1));
        assert!((summarize(&[Some(0.3), Some(0.1), Some(0.2)]).unwrap().median - 0.2).abs() < 1e-15);
        let s = summarize(&[Some(4.0), Some(1.0), None, Some(3.0), Some(2.0)]).unwrap();
        assert_eq!((s.median, s.q1, s.q3), (2.5, 1.75, 3.25));
        assert_eq!((s.n_functions, s.n_excluded), (4, 1));
        assert!(summarize(&[None, None]).is_err());
    }

    #[test]
    fn trim_keeps_lowest_joint_errors() {
        let a = vec![Some(0.1), Some(0.9), Some(0.2), None, Some(0.3)];
        let b = vec![Some(0.5), Some(0.1), Some(0.1), Some(0.1), Some(0.2)];
        let mask = joint_trim_mask(&[a, b], 0.5).unwrap();
        assert_eq!(mask, vec![false, false, true, false, true]);
    }

    #[test]
    fn ess_of_white_noise_and_ar1() {
        let mut rng = crate::rng::rng_from_seed(2);
        let white: Vec<f64> = (0..20000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ess = effective_sample_size(&white);
        assert!(ess > 15000.0 && ess < 25000.0, "{ess}");
        let mut x = 0.0;
        let ar: Vec<f64> = (0..20000)
            .map(|_| {
                x = 0.9 * x + rng.random_range(-1.0..1.0);
                x
            })
            .collect();
        let ess = effective_sample_size(&ar);
        // (1 − φ)/(1 + φ) = 1/19.
        assert!(ess > 20000.0 / 19.0 * 0.6 && ess < 20000.0 / 19.0 * 1.6, "{ess}");
    }
}
