//! Simulate a two-regime population, date it with radiocarbon samples and
//! refit the regime transitions from the dates alone.

use chronoflow::demography::{
    forward_log_likelihood, infer_transitions, sample_radiocarbon, simulate_hmm, AscentConfig, DemographicHmm, LeslieModel,
    Z0Policy,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let periods = 80;
    let truth = DemographicHmm {
        regimes: vec![LeslieModel::new(vec![1.06], vec![])?, LeslieModel::new(vec![0.94], vec![])?],
        climate_states: 1,
        transitions: vec![vec![vec![0.9, 0.15], vec![0.1, 0.85]]],
        climate_path: vec![0; periods],
        initial_distribution: vec![0.5, 0.5],
        z0: Z0Policy::StableFromInitial { total: 100.0 },
    };
    let sim = simulate_hmm(&truth, periods, 0)?;
    println!("regime path {:?}", sim.path);
    let obs = sample_radiocarbon(&sim.annual_totals, 500, 1)?;
    println!("log-likelihood under the truth {:.3}", forward_log_likelihood(&truth, &obs)?);

    let res = infer_transitions(&truth, &obs, &AscentConfig::default(), 7)?;
    println!("fitted W {:.3?} (log-likelihood {:.3}, {} sweeps)", res.model.transitions[0], res.log_likelihood, res.sweeps);
    for i in &res.intervals {
        println!("  W[{}][{}]: {:.3} in [{:.3}, {:.3}]", i.row, i.column, i.estimate, i.lower, i.upper);
    }
    for w in &res.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
