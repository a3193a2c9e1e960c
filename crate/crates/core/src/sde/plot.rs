use super::{DriftDiffusionField, SampledTrajectory};
use crate::svg::{Bounds, Plot};

/// Drift arrows on the supported grid nodes, data points as dots and sample
/// trajectories as polylines.
pub fn render_field_svg(field: &DriftDiffusionField, data: &[[f64; 2]], trajectories: &[SampledTrajectory]) -> String {
    let g = &field.grid;
    let bounds = Bounds::from_points(&[(g.x_min, g.y_min), (g.x_max, g.y_max)]).expect("grid is finite");
    let mut plot = Plot::new(bounds, 640.0, 640.0);
    let max_len =
        field.drift.iter().enumerate().filter(|(i, _)| field.is_supported(*i)).map(|(_, a)| a[0].hypot(a[1])).fold(0.0, f64::max);
    let scale = if max_len > 0.0 { 0.8 * g.dx().min(g.dy()) / max_len } else { 0.0 };
    for (i, a) in field.drift.iter().enumerate() {
        if !field.is_supported(i) {
            continue;
        }
        let p = g.position(i);
        plot.arrow((p[0], p[1]), (p[0] + scale * a[0], p[1] + scale * a[1]), "#555555");
    }
    for p in data {
        if g.contains(*p) {
            plot.circle(p[0], p[1], 2.0, "#1f77b4");
        }
    }
    let colors = ["#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    for (k, tr) in trajectories.iter().enumerate() {
        let pts: Vec<(f64, f64)> = tr.points.iter().map(|p| (p[0], p[1])).collect();
        plot.polyline(&pts, colors[k % colors.len()], 1.5);
    }
    plot.finish("Drift field", "PC1", "PC2")
}
