//! Transients of a kernel with a single stationary distribution still pool
//! into a bimodal histogram.
//!
//! `cargo run --release --example null_model -- histogram.svg` also writes the plot.

use chronoflow::nullmodel::{histogram_svg, reference_config, run_null_model};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let run = run_null_model(&reference_config())?;
    let r = &run.report;
    println!("{} pooled values, dip {:.4}, p = {:.4} ({} replicates)", r.n_values, r.dip_statistic, r.p_value, r.n_bootstrap);
    println!("modes {:.2?}", r.modes);
    println!("unique stationary distribution: {}", run.stationary.is_some());
    println!("clusters without an attractor: {}", run.clusters_without_attractor(0.05));
    if let Some(out) = std::env::args().nth(1) {
        std::fs::write(&out, histogram_svg(r, "value"))?;
        println!("wrote {out}");
    }
    Ok(())
}
