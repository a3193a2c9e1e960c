use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sample::{check_start, euler_step};
use super::{DriftDiffusionField, SdeError};
use crate::rng;

/// "Leave the `epsilon1` ball around `origin`, then come back within
/// `epsilon2` before `horizon`."
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleQuery {
    pub origin: [f64; 2],
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub horizon: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Integration step.
    #[serde(default = "default_dt")]
    pub dt: f64,
}

fn default_dt() -> f64 {
    0.01
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleEstimate {
    pub probability: f64,
    /// 95% Wald half-width.
    pub confidence_halfwidth: f64,
    pub successes: usize,
    pub n_samples: usize,
}

/// Monte Carlo estimate of the return-cycle probability.
///
/// Replicate `i` uses sub-seed `i` of `query.seed` and steps of exactly `dt`
/// up to the last multiple not beyond the horizon, so longer horizons extend
/// the same paths. Paths that leave the grid or reach unsupported cells count
/// as non-returning from that point on.
pub fn return_probability(field: &DriftDiffusionField, query: &CycleQuery) -> Result<CycleEstimate, SdeError> {
    check_start(field, query.origin, query.dt, query.horizon)?;
    if !(query.epsilon2 > 0.0 && query.epsilon2 < query.epsilon1) {
        return Err(SdeError::InvalidEpsilon);
    }
    let steps = (query.horizon / query.dt + 1e-9).floor() as usize;
    let (e1, e2) = (query.epsilon1 * query.epsilon1, query.epsilon2 * query.epsilon2);
    let o = query.origin;
    let successes = (0..query.n_samples)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = rng::substream(query.seed, i as u64);
            let mut x = o;
            let mut left = false;
            for _ in 0..steps {
                match euler_step(field, x, query.dt, &mut rng) {
                    Ok(next) => x = next,
                    Err(_) => return false,
                }
                let r2 = (x[0] - o[0]).powi(2) + (x[1] - o[1]).powi(2);
                if !left {
                    left = r2 >= e1;
                } else if r2 <= e2 {
                    return true;
                }
            }
            false
        })
        .count();
    let n = query.n_samples.max(1) as f64;
    let p = successes as f64 / n;
    Ok(CycleEstimate {
        probability: p,
        confidence_halfwidth: 1.96 * (p * (1.0 - p) / n).sqrt(),
        successes,
        n_samples: query.n_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::GridSpec;

    fn grid() -> GridSpec {
        GridSpec::new((-3.0, 3.0), (-3.0, 3.0), 25, 25).unwrap()
    }

    fn query(origin: [f64; 2], horizon: f64) -> CycleQuery {
        CycleQuery { origin, epsilon1: 0.5, epsilon2: 0.2, horizon, n_samples: 20, seed: 4, dt: 0.001 }
    }

    #[test]
    fn frozen_field_never_cycles() {
        let f = DriftDiffusionField::from_fn(grid(), |_| ([0.0, 0.0], 0.0)).unwrap();
        assert_eq!(return_probability(&f, &query([0.0, 0.0], 5.0)).unwrap().probability, 0.0);
    }

    #[test]
    fn circular_orbit_returns() {
        let f = DriftDiffusionField::from_fn(grid(), |p| ([-p[1], p[0]], 0.0)).unwrap();
        let est = return_probability(&f, &query([1.0, 0.0], 7.0)).unwrap();
        assert_eq!(est.probability, 1.0);
        assert_eq!(est.confidence_halfwidth, 0.0);
        let short = return_probability(&f, &query([1.0, 0.0], 3.0)).unwrap();
        assert_eq!(short.probability, 0.0);
    }

    #[test]
    fn epsilon_order_is_checked() {
        let f = DriftDiffusionField::from_fn(grid(), |_| ([0.0, 0.0], 0.0)).unwrap();
        let mut q = query([0.0, 0.0], 1.0);
        q.epsilon2 = 0.6;
        assert_eq!(return_probability(&f, &q), Err(SdeError::InvalidEpsilon));
    }
}
