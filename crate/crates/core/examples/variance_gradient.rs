//! A jump in step variance alone produces a bimodal pooled density.

use chronoflow::nullmodel::{variance_gradient_demo, VarianceProfile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let profiles = [VarianceProfile::Constant { variance: 1.0 }, VarianceProfile::Step { split: 5.0, left: 9.0, right: 0.25 }];
    for profile in profiles {
        let (_, report) = variance_gradient_demo(0.05, profile, 200, 30, 0)?;
        println!("{profile:?}: dip {:.4}, p = {:.4}, modes {:.2?}", report.dip_statistic, report.p_value, report.modes);
    }
    Ok(())
}
