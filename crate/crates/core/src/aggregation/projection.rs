use crate::error::{Error, Result};

/// Euclidean projection of `v` onto `{x : x_i ≥ floor, Σ x_i = 1}`.
///
/// Shifts by the floor and applies sort-and-threshold projection onto the
/// simplex of radius `1 - n·floor`.
pub fn project_to_floored_simplex(v: &[f64], floor: f64) -> Result<Vec<f64>> {
    let n = v.len();
    if n == 0 {
        return Err(Error::config("cannot project an empty vector"));
    }
    if !(floor >= 0.0) || n as f64 * floor >= 1.0 {
        return Err(Error::config(format!("weight floor {floor:e} is infeasible for K = {n}")));
    }
    if let Some(x) = v.iter().find(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("projection input {x}")));
    }
    let radius = 1.0 - n as f64 * floor;
    let mut sorted: Vec<f64> = v.iter().map(|x| x - floor).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - radius) / (i + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    Ok(v.iter().map(|x| (x - floor - theta).max(0.0) + floor).collect())
}
