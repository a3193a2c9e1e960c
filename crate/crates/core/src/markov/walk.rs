use rand::Rng as _;

use super::MarkovError;
use crate::rng;

/// Simple ±1 random walk of `steps` increments with `P(+1) = p_up`.
pub fn random_walk(p_up: f64, steps: usize, start: i64, seed: u64) -> Result<Vec<i64>, MarkovError> {
    if !(0.0..=1.0).contains(&p_up) {
        return Err(MarkovError::InvalidProbability(p_up));
    }
    let mut rng = rng::seeded(seed);
    let mut path = Vec::with_capacity(steps + 1);
    let mut x = start;
    path.push(x);
    for _ in 0..steps {
        x += if rng.random_bool(p_up) { 1 } else { -1 };
        path.push(x);
    }
    Ok(path)
}

/// Maps each state to `floor(s / bin_width)`, rounding toward −∞.
///
/// # Panics
/// If `bin_width` is zero.
pub fn coarse_grain(sequence: &[i64], bin_width: u64) -> Vec<i64> {
    assert!(bin_width >= 1, "bin width must be at least 1");
    let w = i64::try_from(bin_width).unwrap_or(i64::MAX);
    sequence.iter().map(|s| s.div_euclid(w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_grain_examples() {
        assert_eq!(coarse_grain(&[0, 1, 4, 5, 9], 5), vec![0, 0, 0, 1, 1]);
        assert_eq!(coarse_grain(&[3, -2, 7], 1), vec![3, -2, 7]);
        assert_eq!(coarse_grain(&[-1, -5], 5), vec![-1, -1]);
    }

    #[test]
    fn walk_examples() {
        assert_eq!(random_walk(1.0, 3, 0, 0).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(random_walk(0.5, 0, 4, 0).unwrap(), vec![4]);
        assert!(random_walk(1.5, 3, 0, 0).is_err());
    }
}
