use serde::{Deserialize, Serialize};

use super::DatasetError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub pairs: usize,
}

/// Log-log least squares of `y` against `x`, pairing observations that share a
/// time stamp inside the closed `window`.
pub fn fit_temporal_scaling(
    x_series: &[(f64, f64)],
    y_series: &[(f64, f64)],
    window: (f64, f64),
) -> Result<ScalingFit, DatasetError> {
    let inside = |t: f64| t >= window.0 && t <= window.1;
    let mut ys: Vec<(f64, f64)> = y_series.iter().copied().filter(|p| inside(p.0)).collect();
    ys.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for &(t, x) in x_series.iter().filter(|p| inside(p.0)) {
        let Ok(i) = ys.binary_search_by(|p| p.0.total_cmp(&t)) else { continue };
        let y = ys[i].1;
        for v in [x, y] {
            if !(v > 0.0) {
                return Err(DatasetError::NonPositiveValue { time: t, value: v });
            }
        }
        lx.push(x.ln());
        ly.push(y.ln());
    }
    let n = lx.len();
    if n < 3 {
        return Err(DatasetError::TooFewPairs(n));
    }
    let nf = n as f64;
    let mx = lx.iter().sum::<f64>() / nf;
    let my = ly.iter().sum::<f64>() / nf;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * mx.abs().max(1.0) * nf {
        return Err(DatasetError::DegenerateX);
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss_res: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - exponent * x).powi(2)).sum();
    let ss_tot: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 };
    Ok(ScalingFit { exponent, intercept, r_squared, window, pairs: n })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> f64, xs: &[f64]) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
        let x = xs.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect();
        let y = xs.iter().enumerate().map(|(i, &v)| (i as f64, f(v))).collect();
        (x, y)
    }

    #[test]
    fn cubic_law() {
        let (x, y) = series(|v| v.powi(3), &[1.0, 2.0, 4.0, 8.0]);
        let f = fit_temporal_scaling(&x, &y, (0.0, 10.0)).unwrap();
        assert!((f.exponent - 3.0).abs() < 1e-9);
        assert_eq!(f.r_squared, 1.0);
    }

    #[test]
    fn linear_law_any_constant() {
        let (x, y) = series(|v| 7.5 * v, &[1.0, 3.0, 5.0, 9.0]);
        let f = fit_temporal_scaling(&x, &y, (0.0, 10.0)).unwrap();
        assert!((f.exponent - 1.0).abs() < 1e-12);
        assert!((f.intercept - 7.5_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn window_and_errors() {
        let (x, y) = series(|v| v, &[1.0, 2.0, -1.0, 4.0]);
        assert!(matches!(fit_temporal_scaling(&x, &y, (0.0, 3.0)), Err(DatasetError::NonPositiveValue { .. })));
        assert!(matches!(fit_temporal_scaling(&x, &y, (0.0, 1.0)), Err(DatasetError::TooFewPairs(2))));
    }
}
