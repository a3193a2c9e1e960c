use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DriftDiffusionField, GridSpec, SdeError};
use crate::dataset::Dataset;

/// One consecutive observation pair: start point, displacement, time gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub x: [f64; 2],
    pub dx: [f64; 2],
    pub dt: f64,
}

/// Consecutive pairs of each series where both variables are observed.
pub fn transitions_from_dataset(dataset: &Dataset, vars: (&str, &str)) -> Result<Vec<Transition>, SdeError> {
    let ix = dataset.variable_index(vars.0).ok_or_else(|| SdeError::UnknownVariable(vars.0.into()))?;
    let iy = dataset.variable_index(vars.1).ok_or_else(|| SdeError::UnknownVariable(vars.1.into()))?;
    let mut out = Vec::new();
    for s in &dataset.series {
        let pts: Vec<(f64, [f64; 2])> =
            s.observations.iter().filter_map(|o| Some((o.time, [o.values[ix]?, o.values[iy]?]))).collect();
        for w in pts.windows(2) {
            out.push(Transition { x: w[0].1, dx: [w[1].1[0] - w[0].1[0], w[1].1[1] - w[0].1[1]], dt: w[1].0 - w[0].0 });
        }
    }
    Ok(out)
}

/// [`estimate_from_transitions`] on the dataset's `(vars.0, vars.1)` plane.
pub fn estimate_drift_diffusion(
    dataset: &Dataset,
    vars: (&str, &str),
    grid: GridSpec,
    bandwidth: f64,
) -> Result<DriftDiffusionField, SdeError> {
    estimate_from_transitions(&transitions_from_dataset(dataset, vars)?, grid, bandwidth)
}

/// Gaussian-kernel local-linear Kramers–Moyal estimate on every grid node.
///
/// Each pair is located at its start point and weighted by
/// `exp(-r²/2h²)` for `r <= 3h`. Drift is the intercept of a weighted linear
/// regression of `Δx/Δt` on the offset from the node. Diffusion is the
/// weighted mean of `‖Δx - â(xᵢ)Δt‖² / (Δt·2)` with `â` the local fit, so it
/// estimates the per-component noise variance per unit time. A node's sample
/// count is the number of pairs starting within `h`; nodes with none are
/// unsupported and carry zero drift and diffusion.
pub fn estimate_from_transitions(pairs: &[Transition], grid: GridSpec, bandwidth: f64) -> Result<DriftDiffusionField, SdeError> {
    grid.validate()?;
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(SdeError::InvalidBandwidth(bandwidth));
    }
    if pairs.is_empty() {
        return Err(SdeError::NoUsablePairs);
    }
    if let Some((index, p)) = pairs.iter().enumerate().find(|(_, p)| !(p.dt > 0.0) || !p.dt.is_finite()) {
        return Err(SdeError::NonPositiveGap { index, gap: p.dt });
    }
    let h = bandwidth;
    let cutoff2 = (3.0 * h) * (3.0 * h);
    let nodes: Vec<_> = (0..grid.node_count())
        .into_par_iter()
        .map(|node| {
            let c = grid.position(node);
            let local: Vec<(&Transition, f64, [f64; 2])> = pairs
                .iter()
                .filter_map(|p| {
                    let u = [(p.x[0] - c[0]) / h, (p.x[1] - c[1]) / h];
                    let r2 = (u[0] * u[0] + u[1] * u[1]) * h * h;
                    (r2 <= cutoff2).then(|| (p, (-0.5 * r2 / (h * h)).exp(), u))
                })
                .collect();
            let count = local.iter().filter(|(_, _, u)| u[0] * u[0] + u[1] * u[1] <= 1.0).count();
            if count == 0 {
                return ([0.0; 2], 0.0, 0);
            }
            let (drift, slope) = local_linear(&local);
            let (mut num, mut den) = (0.0, 0.0);
            for (p, w, u) in &local {
                let pred =
                    [drift[0] + slope[0][0] * u[0] + slope[0][1] * u[1], drift[1] + slope[1][0] * u[0] + slope[1][1] * u[1]];
                let r = [p.dx[0] - pred[0] * p.dt, p.dx[1] - pred[1] * p.dt];
                num += w * (r[0] * r[0] + r[1] * r[1]) / (2.0 * p.dt);
                den += w;
            }
            (drift, num / den, count)
        })
        .collect();
    let mut drift = Vec::with_capacity(nodes.len());
    let mut diffusion = Vec::with_capacity(nodes.len());
    let mut counts = Vec::with_capacity(nodes.len());
    for (a, d, c) in nodes {
        drift.push(a);
        diffusion.push(d);
        counts.push(c);
    }
    DriftDiffusionField::new(grid, drift, diffusion, counts)
}

/// Weighted least squares of velocity on the offset `u`, with regressors
/// centred at their weighted mean. Slopes come from a pseudo-inverse so
/// degenerate designs (collinear or coincident starts) get zero slope along
/// the unresolved direction. Returns the value at the node and the slope rows.
fn local_linear(local: &[(&Transition, f64, [f64; 2])]) -> ([f64; 2], [[f64; 2]; 2]) {
    let wsum: f64 = local.iter().map(|l| l.1).sum();
    let mut ubar = [0.0; 2];
    let mut vbar = [0.0; 2];
    for (p, w, u) in local {
        for k in 0..2 {
            ubar[k] += w * u[k] / wsum;
            vbar[k] += w * p.dx[k] / p.dt / wsum;
        }
    }
    let mut c = Matrix2::<f64>::zeros();
    let mut cross = [Vector2::<f64>::zeros(); 2];
    for (p, w, u) in local {
        let z = Vector2::new(u[0] - ubar[0], u[1] - ubar[1]);
        c += z * z.transpose() * *w;
        for k in 0..2 {
            cross[k] += z * (w * (p.dx[k] / p.dt - vbar[k]));
        }
    }
    let eps = 1e-10 * c.trace() + 1e-300;
    let svd = c.svd(true, true);
    let slope = cross.map(|b| svd.solve(&b, eps).map_or([0.0, 0.0], |s| [s[0], s[1]]));
    let at_node = [0, 1].map(|k| vbar[k] - slope[k][0] * ubar[0] - slope[k][1] * ubar[1]);
    (at_node, slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::new((-2.0, 2.0), (-2.0, 2.0), 9, 9).unwrap()
    }

    #[test]
    fn deterministic_translation() {
        let pairs: Vec<_> = (0..40).map(|i| Transition { x: [-2.0 + 0.1 * i as f64, 0.0], dx: [1.0, 0.0], dt: 1.0 }).collect();
        let f = estimate_from_transitions(&pairs, grid(), 0.5).unwrap();
        assert!(f.sample_counts.contains(&0));
        for i in 0..f.drift.len() {
            if f.is_supported(i) {
                assert!((f.drift[i][0] - 1.0).abs() < 1e-9 && f.drift[i][1].abs() < 1e-9, "{:?}", f.drift[i]);
                assert!(f.diffusion[i].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stationary_series_has_no_drift() {
        let pairs = vec![Transition { x: [0.3, -0.2], dx: [0.0, 0.0], dt: 0.5 }; 10];
        let f = estimate_from_transitions(&pairs, grid(), 0.5).unwrap();
        for i in (0..f.drift.len()).filter(|&i| f.is_supported(i)) {
            assert!(f.drift[i][0].abs() < 1e-12 && f.drift[i][1].abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let bad = vec![Transition { x: [0.0, 0.0], dx: [1.0, 0.0], dt: 0.0 }];
        assert!(matches!(estimate_from_transitions(&bad, grid(), 0.5), Err(SdeError::NonPositiveGap { .. })));
        assert!(matches!(estimate_from_transitions(&[], grid(), 0.5), Err(SdeError::NoUsablePairs)));
    }

    #[test]
    fn linear_drift_recovered_exactly_without_noise() {
        let mut pairs = Vec::new();
        for i in 0..21 {
            for j in 0..21 {
                let x = [-2.0 + 0.2 * i as f64, -2.0 + 0.2 * j as f64];
                pairs.push(Transition { x, dx: [-0.05 * x[0], -0.05 * x[1] + 0.01], dt: 0.1 });
            }
        }
        let f = estimate_from_transitions(&pairs, grid(), 0.5).unwrap();
        for i in 0..f.drift.len() {
            let p = f.grid.position(i);
            assert!((f.drift[i][0] + 0.5 * p[0]).abs() < 1e-9);
            assert!((f.drift[i][1] + 0.5 * p[1] - 0.1).abs() < 1e-9);
        }
    }
}
