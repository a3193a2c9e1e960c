use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::NullModelError;
use crate::rng;

pub const MIN_BOOTSTRAP: usize = 1000;
pub const MIN_VALUES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BimodalityReport {
    pub dip_statistic: f64,
    pub p_value: f64,
    pub n_bootstrap: usize,
    pub n_values: usize,
    pub histogram: Histogram,
    pub modes: Vec<f64>,
}

/// Hartigan's dip statistic of a sorted sample.
///
/// Port of the AS 217 algorithm with the later index fixes. All-equal input
/// gives 0; otherwise the result is at least `1/(2n)`.
pub fn dip_statistic(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n == 0 || sorted[n - 1] == sorted[0] {
        return 0.0;
    }
    // 1-based working copy keeps the index arithmetic identical to the reference
    let mut x = Vec::with_capacity(n + 1);
    x.push(0.0);
    x.extend_from_slice(sorted);

    let mut mn = vec![0usize; n + 1];
    let mut mj = vec![0usize; n + 1];
    mn[1] = 1;
    for j in 2..=n {
        mn[j] = j - 1;
        loop {
            let mnj = mn[j];
            let mnmnj = mn[mnj];
            if mnj == 1 || (x[j] - x[mnj]) * ((mnj - mnmnj) as f64) < (x[mnj] - x[mnmnj]) * ((j - mnj) as f64) {
                break;
            }
            mn[j] = mnmnj;
        }
    }
    mj[n] = n;
    for k in (1..n).rev() {
        mj[k] = k + 1;
        loop {
            let mjk = mj[k];
            let mjmjk = mj[mjk];
            if mjk == n || (x[k] - x[mjk]) * (mjk as f64 - mjmjk as f64) < (x[mjk] - x[mjmjk]) * (k as f64 - mjk as f64) {
                break;
            }
            mj[k] = mjmjk;
        }
    }

    let mut gcm = vec![0usize; n + 2];
    let mut lcm = vec![0usize; n + 2];
    let (mut low, mut high) = (1usize, n);
    let mut dip = 1.0_f64;
    loop {
        gcm[1] = high;
        let mut i = 1;
        while gcm[i] > low {
            gcm[i + 1] = mn[gcm[i]];
            i += 1;
        }
        let l_gcm = i;
        let mut ig = l_gcm;
        let mut ix = ig - 1;

        lcm[1] = low;
        let mut i = 1;
        while lcm[i] < high {
            lcm[i + 1] = mj[lcm[i]];
            i += 1;
        }
        let l_lcm = i;
        let mut ih = l_lcm;
        let mut iv = 2;

        let mut d = 0.0_f64;
        if l_gcm != 2 || l_lcm != 2 {
            loop {
                let gcmix = gcm[ix];
                let lcmiv = lcm[iv];
                if gcmix > lcmiv {
                    let gcmi1 = gcm[ix + 1];
                    let dx = (lcmiv as f64 - gcmi1 as f64 + 1.0)
                        - (x[lcmiv] - x[gcmi1]) * (gcmix - gcmi1) as f64 / (x[gcmix] - x[gcmi1]);
                    iv += 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv - 1;
                    }
                } else {
                    let lcmiv1 = lcm[iv - 1];
                    let dx = (x[gcmix] - x[lcmiv1]) * (lcmiv - lcmiv1) as f64 / (x[lcmiv] - x[lcmiv1])
                        - (gcmix as f64 - lcmiv1 as f64 - 1.0);
                    ix -= 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv;
                    }
                }
                ix = ix.max(1);
                iv = iv.min(l_lcm);
                if gcm[ix] == lcm[iv] {
                    break;
                }
            }
        } else {
            d = 1.0;
        }
        if d < dip {
            break;
        }

        let mut dip_l = 0.0_f64;
        for j in ig..l_gcm {
            let mut max_t = 1.0_f64;
            let (jb, je) = (gcm[j + 1], gcm[j]);
            if je - jb > 1 && x[je] != x[jb] {
                let c = (je - jb) as f64 / (x[je] - x[jb]);
                for jj in jb..=je {
                    let t = (jj - jb + 1) as f64 - (x[jj] - x[jb]) * c;
                    max_t = max_t.max(t);
                }
            }
            dip_l = dip_l.max(max_t);
        }
        let mut dip_u = 0.0_f64;
        for j in ih..l_lcm {
            let mut max_t = 1.0_f64;
            let (jb, je) = (lcm[j], lcm[j + 1]);
            if je - jb > 1 && x[je] != x[jb] {
                let c = (je - jb) as f64 / (x[je] - x[jb]);
                for jj in jb..=je {
                    let t = (x[jj] - x[jb]) * c - (jj as f64 - jb as f64 - 1.0);
                    max_t = max_t.max(t);
                }
            }
            dip_u = dip_u.max(max_t);
        }
        dip = dip.max(dip_u.max(dip_l));

        if low == gcm[ig] && high == lcm[ih] {
            break;
        }
        low = gcm[ig];
        high = lcm[ih];
    }
    dip / (2 * n) as f64
}

/// Dip test against the uniform null with a Freedman–Diaconis histogram and
/// histogram-based mode estimates.
///
/// The p-value is `(1 + #{dip* >= dip}) / (1 + B)` over `B` uniform samples of
/// the same size; replicate `b` draws from sub-seed `b` of `seed`.
pub fn bimodality_test(values: &[f64], n_bootstrap: usize, seed: u64) -> Result<BimodalityReport, NullModelError> {
    if values.len() < MIN_VALUES {
        return Err(NullModelError::TooFewValues { needed: MIN_VALUES, found: values.len() });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(NullModelError::NonFinite);
    }
    if n_bootstrap < MIN_BOOTSTRAP {
        return Err(NullModelError::TooFewBootstrap(n_bootstrap));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let dip = dip_statistic(&sorted);
    let n = sorted.len();
    let exceed = (0..n_bootstrap)
        .into_par_iter()
        .filter(|&b| {
            let mut rng = rng::substream(seed, b as u64);
            let mut u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            u.sort_by(f64::total_cmp);
            dip_statistic(&u) >= dip
        })
        .count();
    let histogram = freedman_diaconis(&sorted);
    let modes = modes(&histogram, &sorted);
    Ok(BimodalityReport {
        dip_statistic: dip,
        p_value: (1 + exceed) as f64 / (1 + n_bootstrap) as f64,
        n_bootstrap,
        n_values: n,
        histogram,
        modes,
    })
}

/// Type-7 (linear interpolation) sample quantile of sorted data.
pub(crate) fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Bin width `2·IQR·n^(-1/3)`; falls back to `range/√n` when the IQR is 0.
pub fn freedman_diaconis(sorted: &[f64]) -> Histogram {
    let n = sorted.len();
    let (lo, hi) = (sorted[0], sorted[n - 1]);
    let range = hi - lo;
    if range == 0.0 {
        return Histogram { edges: vec![lo - 0.5, hi + 0.5], counts: vec![n] };
    }
    let iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
    let width = if iqr > 0.0 { 2.0 * iqr / (n as f64).cbrt() } else { range / (n as f64).sqrt() };
    let bins = ((range / width).ceil() as usize).clamp(1, n.max(1));
    let w = range / bins as f64;
    let mut edges: Vec<f64> = (0..bins).map(|i| lo + w * i as f64).collect();
    edges.push(hi);
    let mut counts = vec![0usize; bins];
    for &v in sorted {
        let b = (((v - lo) / w) as usize).min(bins - 1);
        counts[b] += 1;
    }
    Histogram { edges, counts }
}

/// Peaks below this fraction of the tallest bin are treated as noise.
const MIN_PEAK_FRACTION: f64 = 0.1;

/// Mode locations: histogram peaks separated by a trough lower than half the
/// smaller of the two peaks. Each location is the median of the values in the
/// mode's basin (between neighbouring separating troughs).
pub fn modes(h: &Histogram, sorted: &[f64]) -> Vec<f64> {
    let c = &h.counts;
    let tallest = *c.iter().max().unwrap_or(&0);
    if tallest == 0 {
        return Vec::new();
    }
    let floor = MIN_PEAK_FRACTION * tallest as f64;
    let mut peaks: Vec<usize> = Vec::new();
    let mut troughs: Vec<usize> = Vec::new();
    for i in 0..c.len() {
        let left = if i == 0 { 0 } else { c[i - 1] };
        let right = if i + 1 == c.len() { 0 } else { c[i + 1] };
        if c[i] < left || c[i] < right || c[i] == 0 || (c[i] as f64) < floor || (i > 0 && c[i] == left) {
            continue;
        }
        let Some(&last) = peaks.last() else {
            peaks.push(i);
            continue;
        };
        let (t, &trough) =
            c[last..=i].iter().enumerate().min_by_key(|(_, v)| **v).map(|(k, v)| (k + last, v)).expect("non-empty");
        if (trough as f64) < 0.5 * c[last].min(c[i]) as f64 {
            troughs.push(t);
            peaks.push(i);
        } else if c[i] > c[last] {
            *peaks.last_mut().expect("non-empty") = i;
        }
    }
    let mut bounds = vec![f64::NEG_INFINITY];
    bounds.extend(troughs.iter().map(|&t| 0.5 * (h.edges[t] + h.edges[t + 1])));
    bounds.push(f64::INFINITY);
    bounds
        .windows(2)
        .map(|w| {
            let basin: Vec<f64> = sorted.iter().copied().filter(|v| *v >= w[0] && *v < w[1]).collect();
            if basin.is_empty() {
                0.5 * (w[0] + w[1])
            } else {
                quantile(&basin, 0.5)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // frozen from an independent implementation of the same algorithm
        assert!((dip_statistic(&[1.0, 2.0, 3.0, 4.0, 10.0, 11.0, 12.0, 13.0]) - 0.16666666666666669).abs() < 1e-15);
        assert_eq!(dip_statistic(&[2.0; 20]), 0.0);
        let two = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        assert!(dip_statistic(&two) > 0.0);
    }

    #[test]
    fn affine_invariance() {
        let v: Vec<f64> = (0..40).map(|i| ((i * 37 % 41) as f64).sqrt()).collect();
        let mut s = v.clone();
        s.sort_by(f64::total_cmp);
        let t: Vec<f64> = s.iter().map(|x| 3.5 * x - 7.0).collect();
        assert!((dip_statistic(&s) - dip_statistic(&t)).abs() < 1e-12);
    }

    #[test]
    fn histogram_counts_everything() {
        let s: Vec<f64> = (0..100).map(|i| (i as f64 / 10.0).powi(2)).collect();
        let h = freedman_diaconis(&s);
        assert_eq!(h.counts.iter().sum::<usize>(), 100);
        assert_eq!(h.edges.len(), h.counts.len() + 1);
    }

    #[test]
    fn requires_enough_data() {
        assert!(matches!(bimodality_test(&[1.0; 5], 1000, 0), Err(NullModelError::TooFewValues { .. })));
        assert!(matches!(bimodality_test(&[1.0; 50], 10, 0), Err(NullModelError::TooFewBootstrap(10))));
    }

    #[test]
    fn constant_values_have_zero_dip() {
        let r = bimodality_test(&[4.0; 30], 1000, 1).unwrap();
        assert_eq!(r.dip_statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.modes, vec![4.0]);
    }
}
