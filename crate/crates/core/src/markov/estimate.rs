use rand::Rng as _;

use super::{MarkovError, TransitionKernel};
use crate::rng;

/// Maximum-likelihood kernel with an additive prior count per cell.
///
/// Rows that received neither observations nor prior mass become self-loops.
pub fn estimate_chain(series_set: &[Vec<usize>], state_count: usize, prior_count: f64) -> Result<TransitionKernel, MarkovError> {
    if !(prior_count >= 0.0) || !prior_count.is_finite() {
        return Err(MarkovError::InvalidPrior(prior_count));
    }
    if state_count == 0 {
        return Err(MarkovError::Empty);
    }
    let mut counts = vec![vec![0.0_f64; state_count]; state_count];
    let mut transitions = 0usize;
    for seq in series_set {
        if let Some(&symbol) = seq.iter().find(|&&s| s >= state_count) {
            return Err(MarkovError::SymbolOutOfRange { symbol, state_count });
        }
        for w in seq.windows(2) {
            counts[w[0]][w[1]] += 1.0;
            transitions += 1;
        }
    }
    if transitions == 0 {
        return Err(MarkovError::EmptyInput);
    }
    let matrix = counts
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            let total: f64 = row.iter().sum::<f64>() + prior_count * state_count as f64;
            if total == 0.0 {
                (0..state_count).map(|j| f64::from(u8::from(i == j))).collect()
            } else {
                row.iter().map(|c| (c + prior_count) / total).collect()
            }
        })
        .collect();
    TransitionKernel::new(matrix)
}

/// Sample path of `steps` transitions starting at `start_state`.
pub fn simulate_chain(kernel: &TransitionKernel, start_state: usize, steps: usize, seed: u64) -> Result<Vec<usize>, MarkovError> {
    let s = kernel.states();
    if start_state >= s {
        return Err(MarkovError::InvalidStart { state: start_state, state_count: s });
    }
    let sampler = RowSampler::new(kernel);
    let mut rng = rng::seeded(seed);
    let mut path = Vec::with_capacity(steps + 1);
    let mut state = start_state;
    path.push(state);
    for _ in 0..steps {
        state = sampler.next(state, rng.random::<f64>());
        path.push(state);
    }
    Ok(path)
}

/// Inverse-CDF sampling over precomputed cumulative rows.
pub(crate) struct RowSampler {
    cumulative: Vec<Vec<f64>>,
}

impl RowSampler {
    pub(crate) fn new(kernel: &TransitionKernel) -> Self {
        let cumulative = kernel
            .matrix()
            .iter()
            .map(|row| {
                let mut acc = 0.0;
                row.iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect()
            })
            .collect();
        RowSampler { cumulative }
    }

    /// Next state from `state` given a uniform draw `u` in [0, 1).
    pub(crate) fn next(&self, state: usize, u: f64) -> usize {
        let row = &self.cumulative[state];
        let target = u * row[row.len() - 1];
        // the first cumulative value above the target always has positive mass
        match row.partition_point(|&c| c <= target) {
            j if j < row.len() => j,
            _ => row.iter().rposition(|&c| c < row[row.len() - 1]).map_or(0, |j| j + 1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternation() {
        let k = estimate_chain(&[vec![0, 1, 0, 1, 0]], 2, 0.0).unwrap();
        assert_eq!(k.matrix(), &[vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn unvisited_rows_self_loop() {
        let k = estimate_chain(&[vec![0, 0, 0, 0]], 2, 0.0).unwrap();
        assert_eq!(k.matrix(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let k = estimate_chain(&[vec![0, 0, 0, 0]], 2, 1.0).unwrap();
        assert_eq!(k.matrix()[1], vec![0.5, 0.5]);
    }

    #[test]
    fn errors() {
        assert_eq!(estimate_chain(&[vec![0, 2]], 2, 0.0), Err(MarkovError::SymbolOutOfRange { symbol: 2, state_count: 2 }));
        assert_eq!(estimate_chain(&[vec![0]], 2, 0.0), Err(MarkovError::EmptyInput));
        assert_eq!(estimate_chain(&[], 2, 0.0), Err(MarkovError::EmptyInput));
    }

    #[test]
    fn deterministic_kernel_path() {
        let k = TransitionKernel::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(simulate_chain(&k, 0, 4, 9).unwrap(), vec![0, 1, 0, 1, 0]);
        assert_eq!(simulate_chain(&k, 1, 0, 9).unwrap(), vec![1]);
        assert!(simulate_chain(&k, 2, 1, 9).is_err());
    }

    #[test]
    fn zero_probability_states_never_sampled() {
        let k = TransitionKernel::new(vec![vec![0.5, 0.5, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]]).unwrap();
        let s = RowSampler::new(&k);
        for u in [0.0, 0.25, 0.5, 0.999_999, 1.0 - f64::EPSILON] {
            assert_ne!(s.next(0, u), 2);
            assert_eq!(s.next(1, u), 1);
        }
    }

    #[test]
    fn uniform_kernel_frequency() {
        let k = TransitionKernel::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let path = simulate_chain(&k, 0, 100_000, 3).unwrap();
        let f = path.iter().filter(|&&s| s == 0).count() as f64 / path.len() as f64;
        assert!((0.49..=0.51).contains(&f), "{f}");
    }
}
