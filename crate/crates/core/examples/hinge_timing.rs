//! Saw-tooth fit of PC2 against PC1 and the timing of onset events relative
//! to the two breakpoints.
//!
//! `cargo run --release --example hinge_timing -- hinge.svg` also writes the plot.

use chronoflow::dataset::{load_dataset, sliding_window_mean, ColumnMapping, DEFAULT_MIN_COUNT};
use chronoflow::hinge::{mg_timing_report, render_hinge_svg, select_breakpoint_count, Onset};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let ds = load_dataset(format!("{dir}/sawtooth_scores.csv"), &ColumnMapping::standard(&["pc1", "pc2"]))?;
    let points: Vec<(f64, f64)> =
        ds.series.iter().flat_map(|s| &s.observations).filter_map(|o| Some((o.values[0]?, o.values[1]?))).collect();
    let fit = select_breakpoint_count(&points, 3, 8, 11)?;
    println!("{} breaks at {:.3?}, slopes {:.3?}, BIC {:.1}", fit.n_breaks(), fit.breakpoints, fit.segment_slopes, fit.bic);

    let onsets: Vec<Onset> =
        csv::Reader::from_path(format!("{dir}/sawtooth_events.csv"))?.deserialize().collect::<Result<_, _>>()?;
    let report = mg_timing_report(&ds, 0, &onsets, &fit)?;
    println!("{:?}, {} extrapolated, {} series without events", report.counts, report.extrapolated, report.censored.len());

    if let Some(out) = std::env::args().nth(1) {
        let curve = sliding_window_mean(&points, 1.0, DEFAULT_MIN_COUNT)?;
        std::fs::write(&out, render_hinge_svg(&points, &curve, &fit, "PC1", "PC2"))?;
        println!("wrote {out}");
    }
    Ok(())
}
