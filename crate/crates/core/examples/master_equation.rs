//! Two-state master equation against its closed form.

use chronoflow::markov::{integrate_master_equation, RateMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = RateMatrix::new(vec![vec![-1.0, 1.0], vec![1.0, -1.0]])?;
    let traj = integrate_master_equation(&q, &[1.0, 0.0], 5.0, 0.001)?;
    for t in [0.1, 0.5, 1.0, 5.0] {
        let p = traj.at(t);
        let exact = 0.5 * (1.0 + (-2.0 * t).exp());
        println!("t = {t}: p0 = {:.9}, closed form {exact:.9}, sum {:.12}", p[0], p[0] + p[1]);
    }
    Ok(())
}
