use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{bimodality_test, BimodalityReport, NullModelError};
use crate::dataset::Dataset;
use crate::markov::{estimate_chain, simulate_chain, stationary_distribution, StateBinning, TransitionKernel};
use crate::rng::{self, Rng};
use crate::svg::{Bounds, Plot};

/// Finite distribution over `values` with `weights` summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrete<T> {
    pub values: Vec<T>,
    pub weights: Vec<f64>,
}

impl<T: Copy> Discrete<T> {
    pub fn point(v: T) -> Self {
        Discrete { values: vec![v], weights: vec![1.0] }
    }

    pub fn validate(&self) -> Result<(), NullModelError> {
        if self.values.is_empty() || self.values.len() != self.weights.len() {
            return Err(NullModelError::InvalidDistribution("values and weights must be non-empty and equal length".into()));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(NullModelError::InvalidDistribution("weights must be non-negative".into()));
        }
        let s: f64 = self.weights.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(NullModelError::InvalidDistribution(format!("weights sum to {s}")));
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut Rng) -> T {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (v, w) in self.values.iter().zip(&self.weights) {
            acc += w;
            if u < acc {
                return *v;
            }
        }
        let last = self.weights.iter().rposition(|w| *w > 0.0).unwrap_or(0);
        self.values[last]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n_series: usize,
    /// Start values in the kernel's value space (bin coordinates when binned,
    /// state indices otherwise).
    pub start_distribution: Discrete<f64>,
    /// Series lengths as observation counts.
    pub length_distribution: Discrete<usize>,
    pub seed: u64,
}

/// Bins each series and estimates a first-order kernel without prior counts.
pub fn fit_conditional_kernel(series_set: &[Vec<f64>], binning: &StateBinning) -> Result<TransitionKernel, NullModelError> {
    let binned = series_set
        .iter()
        .map(|s| s.iter().map(|&v| binning.bin_of(v).ok_or(NullModelError::OutOfRange(v))).collect())
        .collect::<Result<Vec<Vec<usize>>, _>>()?;
    Ok(estimate_chain(&binned, binning.bin_count(), 0.0)?.with_binning(binning.clone())?)
}

/// Runs `n_series` independent chains; series `i` uses sub-seed `i`.
///
/// Values are bin centres for binned kernels and state indices otherwise.
/// Times are `0, 1, ..., length - 1`.
pub fn generate_ensemble(kernel: &TransitionKernel, spec: &EnsembleSpec) -> Result<Dataset, NullModelError> {
    if spec.n_series == 0 {
        return Err(NullModelError::EmptyEnsemble);
    }
    spec.start_distribution.validate()?;
    spec.length_distribution.validate()?;
    if spec.length_distribution.values.contains(&0) {
        return Err(NullModelError::InvalidDistribution("lengths must be at least 1".into()));
    }
    let to_state = |v: f64| -> Result<usize, NullModelError> {
        match kernel.binning() {
            Some(b) => b.bin_of(v).ok_or(NullModelError::OutOfRange(v)),
            None if v >= 0.0 && v.fract() == 0.0 && (v as usize) < kernel.states() => Ok(v as usize),
            None => Err(NullModelError::OutOfRange(v)),
        }
    };
    for &v in &spec.start_distribution.values {
        to_state(v)?;
    }
    let value_of = |s: usize| kernel.binning().map_or(s as f64, |b| b.center(s));
    let width = (spec.n_series - 1).to_string().len().max(3);
    let mut series = Vec::with_capacity(spec.n_series);
    for i in 0..spec.n_series {
        let mut r = rng::substream(spec.seed, i as u64);
        let start = to_state(spec.start_distribution.sample(&mut r))?;
        let len = spec.length_distribution.sample(&mut r);
        let path = simulate_chain(kernel, start, len - 1, r.random())?;
        let pts = path.into_iter().enumerate().map(|(t, s)| (t as f64, value_of(s))).collect();
        series.push((format!("s{i:0width$}"), pts));
    }
    Ok(Dataset::univariate("value", series)?)
}

/// Replaces every value by a uniform draw inside its bin, so pooled bin
/// centres do not produce artificial ties.
pub fn jitter_within_bins(values: &[f64], binning: &StateBinning, seed: u64) -> Result<Vec<f64>, NullModelError> {
    let mut r = rng::seeded(seed);
    values
        .iter()
        .map(|&v| {
            let b = binning.bin_of(v).ok_or(NullModelError::OutOfRange(v))?;
            let (lo, hi) = binning.bounds(b);
            Ok(lo + (hi - lo) * r.random::<f64>())
        })
        .collect()
}

/// The shipped synthetic drift kernel: 20 bins of width 0.5 over [-6, 4].
///
/// Left of -3 the chain mostly stays put with a slight rightward bias; in
/// [-3, 0) it jumps right by 1–3 bins; from 0 on it diffuses symmetrically.
/// Moves past either end are clamped onto the end bin. The kernel is
/// irreducible, so it has a unique stationary distribution.
pub fn reference_kernel() -> TransitionKernel {
    let binning = StateBinning::uniform(-6.0, 4.0, 20).expect("static binning");
    let s = binning.bin_count();
    let mut m = vec![vec![0.0; s]; s];
    for (i, row) in m.iter_mut().enumerate() {
        let x = binning.center(i);
        let moves: &[(i64, f64)] = if x < -3.0 {
            &[(0, 0.6), (1, 0.3), (-1, 0.1)]
        } else if x < 0.0 {
            &[(1, 0.25), (2, 0.45), (3, 0.25), (-1, 0.05)]
        } else {
            &[(0, 0.7), (1, 0.15), (-1, 0.15)]
        };
        for &(d, p) in moves {
            let j = (i as i64 + d).clamp(0, s as i64 - 1) as usize;
            row[j] += p;
        }
    }
    TransitionKernel::new(m).expect("rows sum to 1").with_binning(binning).expect("20 bins")
}

/// Seed of the shipped reference configuration.
pub const REFERENCE_SEED: u64 = 20;

/// The shipped reference run: 30 transients of the reference kernel, started
/// in the five leftmost bins with lengths between 10 and 120 steps.
pub fn reference_config() -> NullModelConfig {
    let kernel = reference_kernel();
    let b = kernel.binning().expect("binned");
    let starts = (0..5).map(|i| b.center(i)).collect();
    let lengths = vec![10, 20, 40, 60, 80, 100, 120];
    NullModelConfig {
        ensemble: EnsembleSpec {
            n_series: 30,
            start_distribution: Discrete { values: starts, weights: vec![0.3, 0.25, 0.2, 0.15, 0.1] },
            length_distribution: Discrete { weights: vec![1.0 / 7.0; 7], values: lengths },
            seed: REFERENCE_SEED,
        },
        kernel,
        n_bootstrap: super::MIN_BOOTSTRAP,
        jitter: true,
    }
}

/// A full null-model run description, as read by the `nullmodel` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullModelConfig {
    pub kernel: TransitionKernel,
    pub ensemble: EnsembleSpec,
    #[serde(default = "default_bootstrap")]
    pub n_bootstrap: usize,
    /// Jitter pooled bin centres within their bins before testing.
    #[serde(default = "yes")]
    pub jitter: bool,
}

fn default_bootstrap() -> usize {
    super::MIN_BOOTSTRAP
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullModelRun {
    pub dataset: Dataset,
    pub pooled: Vec<f64>,
    pub report: BimodalityReport,
    /// `None` when the kernel is reducible.
    pub stationary: Option<Vec<f64>>,
}

impl NullModelRun {
    /// Significant clustering from a kernel with a unique stationary law.
    pub fn clusters_without_attractor(&self, alpha: f64) -> bool {
        self.report.p_value < alpha && self.stationary.is_some()
    }
}

/// Generate the ensemble, pool it, test it, and compute the kernel's
/// stationary distribution. Sub-seeds 0 and 1 of the ensemble seed drive the
/// jitter and the bootstrap.
pub fn run_null_model(config: &NullModelConfig) -> Result<NullModelRun, NullModelError> {
    let dataset = generate_ensemble(&config.kernel, &config.ensemble)?;
    let mut pooled = dataset.pooled(0);
    if config.jitter {
        if let Some(b) = config.kernel.binning() {
            pooled = jitter_within_bins(&pooled, b, rng::derive_seed(config.ensemble.seed, u64::MAX))?;
        }
    }
    let report = bimodality_test(&pooled, config.n_bootstrap, rng::derive_seed(config.ensemble.seed, u64::MAX - 1))?;
    let stationary = stationary_distribution(&config.kernel).ok();
    Ok(NullModelRun { dataset, pooled, report, stationary })
}

/// Histogram of the pooled values with mode markers.
pub fn histogram_svg(report: &BimodalityReport, x_label: &str) -> String {
    let h = &report.histogram;
    let top = *h.counts.iter().max().unwrap_or(&1) as f64;
    let bounds = Bounds::from_points(&[(h.edges[0], 0.0), (h.edges[h.edges.len() - 1], top)]).expect("finite");
    let mut plot = Plot::new(bounds, 640.0, 400.0);
    for (i, &c) in h.counts.iter().enumerate() {
        plot.rect(h.edges[i], h.edges[i + 1], 0.0, c as f64, "#9ecae1");
    }
    for &m in &report.modes {
        plot.segment((m, 0.0), (m, top), "#d62728", 1.5);
    }
    let title = format!("dip = {:.4}, p = {:.4}", report.dip_statistic, report.p_value);
    plot.finish(&title, x_label, "count")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_self_loop() {
        let b = StateBinning::uniform(0.0, 3.0, 3).unwrap();
        let k = fit_conditional_kernel(&[vec![1.5; 5]], &b).unwrap();
        assert_eq!(k.matrix()[1], vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn staircase_is_superdiagonal() {
        let b = StateBinning::uniform(0.0, 3.0, 3).unwrap();
        let k = fit_conditional_kernel(&[vec![0.5, 1.5, 2.5]], &b).unwrap();
        assert_eq!(k.get(0, 1), 1.0);
        assert_eq!(k.get(1, 2), 1.0);
        assert!(matches!(fit_conditional_kernel(&[vec![3.5]], &b), Err(NullModelError::OutOfRange(_))));
    }

    #[test]
    fn ensemble_shape_and_determinism() {
        let k = reference_kernel();
        let spec = EnsembleSpec {
            n_series: 30,
            start_distribution: Discrete { values: vec![-5.75, -5.25], weights: vec![0.5, 0.5] },
            length_distribution: Discrete { values: vec![5, 50], weights: vec![0.5, 0.5] },
            seed: 3,
        };
        let a = generate_ensemble(&k, &spec).unwrap();
        assert_eq!(a.series.len(), 30);
        assert_eq!(a, generate_ensemble(&k, &spec).unwrap());
        let bad = EnsembleSpec { n_series: 0, ..spec.clone() };
        assert!(matches!(generate_ensemble(&k, &bad), Err(NullModelError::EmptyEnsemble)));
        let outside = EnsembleSpec { start_distribution: Discrete::point(9.0), ..spec };
        assert!(matches!(generate_ensemble(&k, &outside), Err(NullModelError::OutOfRange(_))));
    }

    #[test]
    fn degenerate_spec_gives_identical_series() {
        let k = TransitionKernel::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let spec = EnsembleSpec {
            n_series: 4,
            start_distribution: Discrete::point(0.0),
            length_distribution: Discrete::point(6),
            seed: 1,
        };
        let d = generate_ensemble(&k, &spec).unwrap();
        assert!(d.series.windows(2).all(|w| w[0].observations == w[1].observations));
    }

    #[test]
    fn reference_kernel_is_irreducible() {
        assert!(stationary_distribution(&reference_kernel()).is_ok());
    }
}
