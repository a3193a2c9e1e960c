//! Power-law exponent between two co-observed quantities.

use chronoflow::dataset::fit_temporal_scaling;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let times: Vec<f64> = (0..40).map(|i| -2000.0 + 50.0 * i as f64).collect();
    let x: Vec<(f64, f64)> = times.iter().enumerate().map(|(i, &t)| (t, 1.0 + 0.5 * i as f64)).collect();
    for k in [1.0, 2.0, 3.5] {
        let y: Vec<(f64, f64)> = x.iter().map(|&(t, v)| (t, 0.2 * v.powf(k))).collect();
        let fit = fit_temporal_scaling(&x, &y, (-2000.0, 0.0))?;
        println!("true k {k}: fitted {:.6} (r² {:.6}, {} pairs)", fit.exponent, fit.r_squared, fit.pairs);
    }
    Ok(())
}
