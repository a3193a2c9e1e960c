use super::HingeFit;
use crate::dataset::WindowCurve;
use crate::svg::{Bounds, Plot};

/// Scatter of the points, windowed means with standard-error bars, and the
/// fitted saw-tooth with dashed breakpoint markers.
pub fn render_hinge_svg(points: &[(f64, f64)], curve: &WindowCurve, fit: &HingeFit, x_label: &str, y_label: &str) -> String {
    let mut bounds = Bounds::from_points(points).unwrap_or(Bounds { x_min: 0.0, x_max: 1.0, y_min: 0.0, y_max: 1.0 });
    let means: Vec<(f64, f64)> = curve.centers.iter().copied().zip(curve.means.iter().copied()).collect();
    if let Some(b) = Bounds::from_points(&means) {
        bounds = bounds.union(b);
    }
    let mut plot = Plot::new(bounds, 720.0, 480.0);
    for &(x, y) in points {
        plot.circle(x, y, 1.8, "#bbbbbb");
    }
    for (&(c, m), se) in means.iter().zip(&curve.standard_errors) {
        plot.error_bar(c, m - se, m + se, "#6baed6");
    }
    plot.polyline(&means, "#2171b5", 1.5);
    let (lo, hi) = (bounds.x_min, bounds.x_max);
    let mut knots = vec![lo];
    knots.extend(fit.breakpoints.iter().copied());
    knots.push(hi);
    let line: Vec<(f64, f64)> = knots.iter().map(|&x| (x, fit.predict(x))).collect();
    plot.polyline(&line, "#d62728", 2.0);
    for &b in &fit.breakpoints {
        plot.dashed(b, "#d62728");
    }
    let title = format!("{} breakpoints, BIC {:.2}", fit.n_breaks(), fit.bic);
    plot.finish(&title, x_label, y_label)
}
