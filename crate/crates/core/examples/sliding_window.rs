//! Windowed means of PC2 against PC1 over the saw-tooth fixture.

use chronoflow::dataset::{load_dataset, sliding_window_mean, ColumnMapping, DEFAULT_MIN_COUNT};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/sawtooth_scores.csv");
    let ds = load_dataset(path, &ColumnMapping::standard(&["pc1", "pc2"]))?;
    let points: Vec<(f64, f64)> =
        ds.series.iter().flat_map(|s| &s.observations).filter_map(|o| Some((o.values[0]?, o.values[1]?))).collect();
    let curve = sliding_window_mean(&points, 1.0, DEFAULT_MIN_COUNT)?;
    println!("center,mean,se,count");
    for i in (0..curve.centers.len()).step_by(10) {
        println!("{:.3},{:.4},{:.4},{}", curve.centers[i], curve.means[i], curve.standard_errors[i], curve.counts[i]);
    }
    Ok(())
}
