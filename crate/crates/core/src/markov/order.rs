use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::MarkovError;

/// Conditioning contexts with fewer samples are ignored.
pub const MIN_CONTEXT_SAMPLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "lag", rename_all = "snake_case")]
pub enum Verdict {
    FirstOrder,
    HigherOrder(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovOrderReport {
    pub max_lag_tested: usize,
    /// `divergences[k - 1]` is the divergence at lag `k`.
    pub divergences: Vec<f64>,
    /// Number of contexts that entered each lag's average.
    pub contexts_used: Vec<usize>,
    pub threshold: f64,
    pub verdict: Verdict,
}

/// Tests whether knowing the state `k` steps back changes the distribution
/// of the next state beyond what the current state already implies.
///
/// For each lag the total-variation distance between `P(next | current)` and
/// `P(next | current, lag-k state)` is averaged over contexts with at least
/// [`MIN_CONTEXT_SAMPLES`] observations, weighted by their sample counts. The
/// sequence needs at least `10·S` transitions for `S` distinct states.
pub fn test_markov_order(sequence: &[i64], max_lag: usize, threshold: f64) -> Result<MarkovOrderReport, MarkovError> {
    let mut index = BTreeMap::new();
    for &s in sequence {
        let next = index.len();
        index.entry(s).or_insert(next);
    }
    let states = index.len().max(1);
    let needed = 10 * states + max_lag + 1;
    if sequence.len() < needed {
        return Err(MarkovError::SequenceTooShort { needed, found: sequence.len() });
    }
    let x: Vec<usize> = sequence.iter().map(|s| index[s]).collect();

    let mut divergences = Vec::with_capacity(max_lag);
    let mut contexts_used = Vec::with_capacity(max_lag);
    for lag in 1..=max_lag {
        let mut first: HashMap<usize, HashMap<usize, usize>> = HashMap::new();
        let mut second: HashMap<(usize, usize), HashMap<usize, usize>> = HashMap::new();
        for t in lag..x.len() - 1 {
            *first.entry(x[t]).or_default().entry(x[t + 1]).or_default() += 1;
            *second.entry((x[t], x[t - lag])).or_default().entry(x[t + 1]).or_default() += 1;
        }
        let mut weighted = 0.0;
        let mut weight = 0usize;
        let mut used = 0usize;
        let mut keys: Vec<_> = second.keys().copied().collect();
        keys.sort_unstable();
        for key in keys {
            let cond = &second[&key];
            let n: usize = cond.values().sum();
            if n < MIN_CONTEXT_SAMPLES {
                continue;
            }
            let base = &first[&key.0];
            let nb: usize = base.values().sum();
            let mut tv = 0.0;
            for (next, &c) in base {
                let pc = cond.get(next).copied().unwrap_or(0) as f64 / n as f64;
                tv += (pc - c as f64 / nb as f64).abs();
            }
            // cond's support is a subset of base's, so this covers every next state
            weighted += 0.5 * tv * n as f64;
            weight += n;
            used += 1;
        }
        divergences.push(if weight > 0 { weighted / weight as f64 } else { 0.0 });
        contexts_used.push(used);
    }
    let verdict = divergences.iter().position(|&d| d > threshold).map_or(Verdict::FirstOrder, |k| Verdict::HigherOrder(k + 1));
    Ok(MarkovOrderReport { max_lag_tested: max_lag, divergences, contexts_used, threshold, verdict })
}
