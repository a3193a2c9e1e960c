use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{bimodality_test, BimodalityReport, NullModelError, MIN_BOOTSTRAP};
use crate::dataset::Dataset;
use crate::rng;

/// Length of the periodic 1-D domain the demo walks on.
pub const DEMO_DOMAIN: f64 = 10.0;

/// Position-dependent step variance, chosen from a fixed catalog.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VarianceProfile {
    Constant {
        variance: f64,
    },
    /// `left` below `split`, `right` from `split` on.
    Step {
        split: f64,
        left: f64,
        right: f64,
    },
    /// Linear from `left` at 0 to `right` at the domain end.
    Ramp {
        left: f64,
        right: f64,
    },
}

impl VarianceProfile {
    pub fn variance(&self, x: f64) -> f64 {
        match *self {
            VarianceProfile::Constant { variance } => variance,
            VarianceProfile::Step { split, left, right } => {
                if x < split {
                    left
                } else {
                    right
                }
            }
            VarianceProfile::Ramp { left, right } => left + (right - left) * (x / DEMO_DOMAIN),
        }
    }

    pub fn validate(&self) -> Result<(), NullModelError> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        let good = match *self {
            VarianceProfile::Constant { variance } => ok(variance),
            VarianceProfile::Step { split, left, right } => ok(left) && ok(right) && split.is_finite(),
            VarianceProfile::Ramp { left, right } => ok(left) && ok(right),
        };
        if good {
            Ok(())
        } else {
            Err(NullModelError::NonPositiveVariance(format!("{self:?}")))
        }
    }
}

/// Walks `n_series` chains on the circle `[0, DEMO_DOMAIN)` with constant
/// mean step and profile-dependent step variance, then tests the pooled
/// positions for multimodality.
///
/// Starts are stratified over the domain: series `s` starts at
/// `(s + 0.5)·L/n`. Each series records its start plus `steps` positions.
pub fn variance_gradient_demo(
    mean_step: f64,
    profile: VarianceProfile,
    steps: usize,
    n_series: usize,
    seed: u64,
) -> Result<(Dataset, BimodalityReport), NullModelError> {
    if n_series == 0 {
        return Err(NullModelError::EmptyEnsemble);
    }
    profile.validate()?;
    if !mean_step.is_finite() {
        return Err(NullModelError::NonFinite);
    }
    let series = (0..n_series)
        .map(|s| {
            let mut r = rng::substream(seed, s as u64);
            let mut x = (s as f64 + 0.5) * DEMO_DOMAIN / n_series as f64;
            let mut pts = Vec::with_capacity(steps + 1);
            pts.push((0.0, x));
            for t in 1..=steps {
                let z: f64 = r.sample(StandardNormal);
                x = (x + mean_step + profile.variance(x).sqrt() * z).rem_euclid(DEMO_DOMAIN);
                pts.push((t as f64, x));
            }
            (format!("s{s:03}"), pts)
        })
        .collect();
    let dataset = Dataset::univariate("position", series)?;
    let report = bimodality_test(&dataset.pooled(0), MIN_BOOTSTRAP, rng::derive_seed(seed, u64::MAX))?;
    Ok((dataset, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_nonpositive() {
        let p = VarianceProfile::Constant { variance: 1.0 };
        assert!(matches!(variance_gradient_demo(0.05, p, 10, 0, 1), Err(NullModelError::EmptyEnsemble)));
        let bad = VarianceProfile::Step { split: 5.0, left: 1.0, right: 0.0 };
        assert!(matches!(variance_gradient_demo(0.05, bad, 10, 3, 1), Err(NullModelError::NonPositiveVariance(_))));
    }
}
