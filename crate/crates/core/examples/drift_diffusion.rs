//! Drift-diffusion field of OU trajectories, its Helmholtz split, a return
//! probability and an SVG of arrows, data and sample paths.
//!
//! `cargo run --example drift_diffusion -- field.svg` also writes the plot.

use chronoflow::dataset::{load_dataset, ColumnMapping};
use chronoflow::sde::{
    estimate_drift_diffusion, helmholtz_decompose, render_field_svg, return_probability, sample_sde, CycleQuery, GridSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/ou_scores.csv");
    let ds = load_dataset(path, &ColumnMapping::standard(&["pc1", "pc2"]))?;
    let grid = GridSpec::new((-1.5, 1.5), (-1.5, 1.5), 13, 13)?;
    let field = estimate_drift_diffusion(&ds, ("pc1", "pc2"), grid, 0.4)?;
    println!("supported nodes: {:.0}%", 100.0 * field.supported_fraction());
    for p in [[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]] {
        let (a, d) = field.interpolate(p)?;
        println!(
            "at {p:?}: drift [{:.3}, {:.3}] (true [{:.3}, {:.3}]), diffusion {d:.3} (true 0.2)",
            a[0],
            a[1],
            -0.5 * p[0],
            -0.5 * p[1]
        );
    }

    let h = helmholtz_decompose(&field)?;
    println!("helmholtz: {:?}, residual {:.3} of {:.3}", h.mode, h.residual_norm, h.field_norm);

    let query = CycleQuery { origin: [0.0, 0.0], epsilon1: 0.5, epsilon2: 0.2, horizon: 10.0, n_samples: 500, seed: 1, dt: 0.05 };
    let est = return_probability(&field, &query)?;
    println!("return probability {:.3} ± {:.3}", est.probability, est.confidence_halfwidth);

    if let Some(out) = std::env::args().nth(1) {
        let dots: Vec<[f64; 2]> =
            ds.series.iter().flat_map(|s| &s.observations).filter_map(|o| Some([o.values[0]?, o.values[1]?])).collect();
        let paths = (0..3).map(|i| sample_sde(&field, [1.0, 0.0], 0.05, 5.0, i)).collect::<Result<Vec<_>, _>>()?;
        std::fs::write(&out, render_field_svg(&field, &dots, &paths))?;
        println!("wrote {out}");
    }
    Ok(())
}
