//! Which discrete-time kernels come from a continuous-time generator.

use chronoflow::markov::{check_embeddability, Embeddability, TransitionKernel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kernels = [
        vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        vec![vec![0.9, 0.1], vec![0.2, 0.8]],
        vec![vec![0.4, 0.6], vec![0.7, 0.3]],
        vec![vec![0.8, 0.1, 0.1], vec![0.1, 0.8, 0.1], vec![0.1, 0.1, 0.8]],
    ];
    for m in kernels {
        let k = TransitionKernel::new(m.clone())?;
        match check_embeddability(&k, 1e-9) {
            Embeddability::Embeddable { generator, round_trip_error } => {
                println!("{m:?}: embeddable, Q = {:.4?}, |exp(Q) - P| = {round_trip_error:.1e}", generator.rates())
            }
            Embeddability::NotEmbeddable { reason } => println!("{m:?}: not embeddable ({reason})"),
            Embeddability::Indeterminate { diagnostics } => println!("{m:?}: indeterminate ({diagnostics})"),
        }
    }
    Ok(())
}
