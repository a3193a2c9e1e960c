use serde::{Deserialize, Serialize};

use super::DatasetError;

pub const WINDOW_CENTERS: usize = 100;
pub const DEFAULT_MIN_COUNT: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowCurve {
    pub centers: Vec<f64>,
    pub means: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub counts: Vec<usize>,
    pub window_width: f64,
}

/// Mean and standard error of `y` in windows `|x - c| <= width/2`.
///
/// The 100 centers are evenly spaced over the span of positions at which the
/// window lies entirely inside the data range (or, when the window is wider
/// than the range, the span where it covers every point). Centers holding
/// fewer than `min_count` points are omitted.
pub fn sliding_window_mean(points: &[(f64, f64)], width: f64, min_count: usize) -> Result<WindowCurve, DatasetError> {
    if !(width > 0.0) || !width.is_finite() {
        return Err(DatasetError::InvalidWidth(width));
    }
    if min_count < 1 {
        return Err(DatasetError::InvalidMinCount);
    }
    if points.len() < min_count {
        return Err(DatasetError::TooFewObservations { needed: min_count, found: points.len() });
    }
    let half = width / 2.0;
    let (x_min, x_max) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    let (a, b) = (x_min + half, x_max - half);
    let (lo, hi) = (a.min(b), a.max(b));
    let n_centers = if hi > lo { WINDOW_CENTERS } else { 1 };
    let reach = half * (1.0 + 1e-12);

    let mut curve = WindowCurve {
        centers: Vec::new(),
        means: Vec::new(),
        standard_errors: Vec::new(),
        counts: Vec::new(),
        window_width: width,
    };
    for k in 0..n_centers {
        let c = if n_centers == 1 { lo } else { lo + (hi - lo) * k as f64 / (n_centers - 1) as f64 };
        let ys: Vec<f64> = points.iter().filter(|p| (p.0 - c).abs() <= reach).map(|p| p.1).collect();
        if ys.len() < min_count {
            continue;
        }
        let n = ys.len() as f64;
        let mean = ys.iter().sum::<f64>() / n;
        let se = if ys.len() > 1 {
            let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        curve.centers.push(c);
        curve.means.push(mean);
        curve.standard_errors.push(se);
        curve.counts.push(ys.len());
    }
    Ok(curve)
}
