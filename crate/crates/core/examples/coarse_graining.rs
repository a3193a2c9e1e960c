//! Binning a random walk makes it look higher order.

use chronoflow::markov::{coarse_grain, estimate_chain, random_walk, simulate_chain, test_markov_order};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let walk = random_walk(0.5, 1_000_000, 0, 42)?;
    let binned = test_markov_order(&coarse_grain(&walk, 5), 2, 0.05)?;
    println!("binned walk: divergences {:.4?} -> {:?}", binned.divergences, binned.verdict);

    let signs: Vec<i64> = walk.windows(2).map(|w| w[1] - w[0]).collect();
    let raw = test_markov_order(&signs, 2, 0.05)?;
    println!("increments:  divergences {:.4?} -> {:?}", raw.divergences, raw.verdict);

    let states: Vec<usize> = signs.iter().map(|&s| usize::from(s > 0)).collect();
    let kernel = estimate_chain(&[states], 2, 0.0)?;
    let chain: Vec<i64> = simulate_chain(&kernel, 0, 100_000, 7)?.into_iter().map(|s| s as i64).collect();
    println!("refit chain: {:?}", test_markov_order(&chain, 2, 0.05)?.verdict);
    Ok(())
}
