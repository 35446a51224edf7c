//! Unit-variance normal draws restricted to a half line.
//!
//! Plain normal rejection when the truncation point is below 0.25 sd,
//! exponential-proposal rejection (Robert 1995) above it.

use rand::Rng;
use rand_distr::StandardNormal;

const NORMAL_SWITCH: f64 = 0.25;

/// `X ~ N(0,1)` conditioned on `X > a`.
pub fn sample_upper_tail<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    if a < NORMAL_SWITCH {
        loop {
            let x: f64 = rng.sample(StandardNormal);
            if x > a {
                return x;
            }
        }
    }
    let alpha = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let u = 1.0 - rng.random::<f64>();
        let z = a - u.ln() / alpha;
        let accept = (-0.5 * (z - alpha) * (z - alpha)).exp();
        if rng.random::<f64>() < accept {
            return z;
        }
    }
}

/// `Z ~ N(mean, 1)` restricted to `(0, ∞)` when `positive`, else `(-∞, 0]`.
pub fn sample_signed<R: Rng + ?Sized>(mean: f64, positive: bool, rng: &mut R) -> f64 {
    if positive {
        mean + sample_upper_tail(-mean, rng)
    } else {
        mean - sample_upper_tail(mean, rng)
    }
}
