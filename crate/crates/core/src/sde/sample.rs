use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{DriftDiffusionField, SdeError};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    /// The next step would have left the grid; the path stops at `time`.
    ExitedGrid {
        time: f64,
    },
    /// The path reached a cell with an unsupported corner at `time`.
    Unsupported {
        time: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledTrajectory {
    pub times: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    pub termination: Termination,
}

impl SampledTrajectory {
    pub fn end(&self) -> [f64; 2] {
        *self.points.last().expect("trajectory holds x0")
    }
}

/// Euler–Maruyama path `x += a(x)·dt + √(D(x)·dt)·ξ` with bilinear `a` and `D`.
///
/// The last step is shortened to land on `t_final`.
pub fn sample_sde(
    field: &DriftDiffusionField,
    x0: [f64; 2],
    dt: f64,
    t_final: f64,
    seed: u64,
) -> Result<SampledTrajectory, SdeError> {
    check_start(field, x0, dt, t_final)?;
    let n = ((t_final / dt) - 1e-9).ceil().max(1.0) as usize;
    let mut rng = rng::seeded(seed);
    let mut times = vec![0.0];
    let mut points = vec![x0];
    let mut x = x0;
    let mut t = 0.0;
    for step in 1..=n {
        let t_next = if step == n { t_final } else { step as f64 * dt };
        match euler_step(field, x, t_next - t, &mut rng) {
            Ok(next) => {
                x = next;
                t = t_next;
                times.push(t);
                points.push(x);
            }
            Err(term) => return Ok(SampledTrajectory { times, points, termination: term.at(t) }),
        }
    }
    Ok(SampledTrajectory { times, points, termination: Termination::Completed })
}

pub(crate) fn check_start(field: &DriftDiffusionField, x0: [f64; 2], dt: f64, t_final: f64) -> Result<(), SdeError> {
    if !(dt > 0.0 && t_final > 0.0) || !dt.is_finite() || !t_final.is_finite() {
        return Err(SdeError::InvalidTime);
    }
    field.interpolate(x0).map(|_| ())
}

pub(crate) enum StepFailure {
    Exit,
    Unsupported,
}

impl StepFailure {
    fn at(self, time: f64) -> Termination {
        match self {
            StepFailure::Exit => Termination::ExitedGrid { time },
            StepFailure::Unsupported => Termination::Unsupported { time },
        }
    }
}

/// One step from a point known to be evaluable.
pub(crate) fn euler_step(field: &DriftDiffusionField, x: [f64; 2], h: f64, rng: &mut Rng) -> Result<[f64; 2], StepFailure> {
    let (a, d) = field.interpolate(x).map_err(|_| StepFailure::Unsupported)?;
    let sd = (d * h).sqrt();
    let mut next = [x[0] + a[0] * h, x[1] + a[1] * h];
    if sd > 0.0 {
        next[0] += sd * rng.sample::<f64, _>(StandardNormal);
        next[1] += sd * rng.sample::<f64, _>(StandardNormal);
    }
    match field.interpolate(next) {
        Ok(_) => Ok(next),
        Err(SdeError::OutsideGrid(..)) => Err(StepFailure::Exit),
        Err(_) => Err(StepFailure::Unsupported),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::GridSpec;

    fn grid() -> GridSpec {
        GridSpec::new((-5.0, 5.0), (-5.0, 5.0), 11, 11).unwrap()
    }

    #[test]
    fn frozen_field() {
        let f = DriftDiffusionField::from_fn(grid(), |_| ([0.0, 0.0], 0.0)).unwrap();
        let tr = sample_sde(&f, [0.3, 0.4], 0.1, 1.0, 1).unwrap();
        assert!(tr.points.iter().all(|p| *p == [0.3, 0.4]));
        assert_eq!(tr.termination, Termination::Completed);
    }

    #[test]
    fn uniform_drift_is_exact() {
        let f = DriftDiffusionField::from_fn(grid(), |_| ([1.0, 0.0], 0.0)).unwrap();
        let tr = sample_sde(&f, [0.0, 1.0], 0.1, 1.0, 1).unwrap();
        let e = tr.end();
        assert!((e[0] - 1.0).abs() < 1e-9 && (e[1] - 1.0).abs() < 1e-12);
        assert!((tr.times.last().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn leaving_the_grid_is_flagged() {
        let f = DriftDiffusionField::from_fn(grid(), |_| ([10.0, 0.0], 0.0)).unwrap();
        let tr = sample_sde(&f, [0.0, 0.0], 0.1, 2.0, 1).unwrap();
        assert!(matches!(tr.termination, Termination::ExitedGrid { .. }));
        assert!(tr.points.iter().all(|p| p[0] <= 5.0));
    }

    #[test]
    fn start_must_be_inside() {
        let f = DriftDiffusionField::from_fn(grid(), |_| ([0.0, 0.0], 0.0)).unwrap();
        assert!(matches!(sample_sde(&f, [6.0, 0.0], 0.1, 1.0, 1), Err(SdeError::OutsideGrid(..))));
    }
}
