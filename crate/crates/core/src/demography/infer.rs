use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DemographicHmm, DemographyError, LikelihoodGraph, Observation};
use crate::rng;

/// Likelihood-ratio cut-off for a 95% interval on one parameter.
pub const CHI2_95: f64 = 3.841458820694124;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AscentConfig {
    /// Random starts in addition to the uniform start.
    #[serde(default = "default_starts")]
    pub extra_starts: usize,
    #[serde(default = "default_sweeps")]
    pub max_sweeps: usize,
    /// Stop when a sweep improves the log-likelihood by less than this.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Points in the per-coordinate scan over `[0, 1]`.
    #[serde(default = "default_scan")]
    pub scan_points: usize,
}

fn default_starts() -> usize {
    1
}

fn default_sweeps() -> usize {
    50
}

fn default_tolerance() -> f64 {
    1e-6
}

fn default_scan() -> usize {
    11
}

impl Default for AscentConfig {
    fn default() -> Self {
        AscentConfig {
            extra_starts: default_starts(),
            max_sweeps: default_sweeps(),
            tolerance: default_tolerance(),
            scan_points: default_scan(),
        }
    }
}

/// Interval for entry `transitions[climate][row][column]`, computed with the
/// other parameters held at the estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterInterval {
    pub climate: usize,
    pub row: usize,
    pub column: usize,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    /// Log-likelihood range over the scan; tiny values mean the data carry
    /// no information on this entry.
    pub scan_range: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceResult {
    pub model: DemographicHmm,
    pub log_likelihood: f64,
    pub converged: bool,
    pub sweeps: usize,
    pub best_start: usize,
    pub intervals: Vec<ParameterInterval>,
    pub warnings: Vec<String>,
}

/// Threshold on the likelihood range below which a parameter is reported as
/// not identifiable.
pub const FLAT_LIKELIHOOD: f64 = 1e-8;

#[derive(Clone, Copy)]
struct Coord {
    climate: usize,
    column: usize,
    row: usize,
}

fn coordinates(n: usize, k: usize) -> Vec<Coord> {
    let rows = if n == 2 { 1 } else { n };
    let mut out = Vec::new();
    for climate in 0..k {
        for column in 0..n {
            for row in 0..rows {
                out.push(Coord { climate, column, row });
            }
        }
    }
    out
}

/// Sets entry `row` of a column to `x`, rescaling the rest to keep the
/// column on the simplex.
fn set_entry(w: &mut [Vec<Vec<f64>>], c: Coord, x: f64) {
    let m = &mut w[c.climate];
    let n = m.len();
    let rest: f64 = (0..n).filter(|&i| i != c.row).map(|i| m[i][c.column]).sum();
    for i in 0..n {
        if i == c.row {
            continue;
        }
        m[i][c.column] = if rest > 0.0 { m[i][c.column] / rest * (1.0 - x) } else { (1.0 - x) / (n - 1) as f64 };
    }
    m[c.row][c.column] = x;
}

struct Objective<'a> {
    graph: &'a LikelihoodGraph,
}

impl Objective<'_> {
    fn at(&self, w: &[Vec<Vec<f64>>], c: Coord, x: f64) -> f64 {
        let mut trial = w.to_vec();
        set_entry(&mut trial, c, x);
        self.graph.evaluate(&trial)
    }

    /// Best point of a scan over `[0, 1]` refined by golden section.
    fn line_search(&self, w: &[Vec<Vec<f64>>], c: Coord, scan: usize) -> (f64, f64, f64) {
        let xs: Vec<f64> = (0..scan).map(|i| i as f64 / (scan - 1) as f64).collect();
        self.search_over(w, c, &xs)
    }

    /// Scan of `scan` points within one scan spacing of the current value.
    fn local_search(&self, w: &[Vec<Vec<f64>>], c: Coord, scan: usize) -> (f64, f64, f64) {
        let x0 = w[c.climate][c.row][c.column];
        let d = 1.0 / (scan - 1) as f64;
        let (lo, hi) = ((x0 - d).max(0.0), (x0 + d).min(1.0));
        let xs: Vec<f64> = (0..5).map(|i| lo + (hi - lo) * i as f64 / 4.0).collect();
        self.search_over(w, c, &xs)
    }

    fn search_over(&self, w: &[Vec<Vec<f64>>], c: Coord, xs: &[f64]) -> (f64, f64, f64) {
        let scan = xs.len();
        let vals: Vec<f64> = xs.iter().map(|&x| self.at(w, c, x)).collect();
        let (bi, _) = vals.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let finite: Vec<f64> = vals.iter().copied().filter(|v| v.is_finite()).collect();
        let range = if finite.is_empty() {
            0.0
        } else {
            finite.iter().copied().fold(f64::NEG_INFINITY, f64::max) - finite.iter().copied().fold(f64::INFINITY, f64::min)
        };
        let lo = xs[bi.saturating_sub(1)];
        let hi = xs[(bi + 1).min(scan - 1)];
        let (x, v) = golden_max(lo, hi, |x| self.at(w, c, x));
        if v >= vals[bi] {
            (x, v, range)
        } else {
            (xs[bi], vals[bi], range)
        }
    }
}

fn golden_max(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-4 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn random_start(n: usize, k: usize, seed: u64) -> Vec<Vec<Vec<f64>>> {
    let mut r = rng::seeded(seed);
    (0..k)
        .map(|_| {
            let mut m = vec![vec![0.0; n]; n];
            for j in 0..n {
                let e: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut r)).collect();
                let s: f64 = e.iter().sum();
                for i in 0..n {
                    m[i][j] = e[i] / s;
                }
            }
            m
        })
        .collect()
}

/// Endpoint of the likelihood-ratio interval on one side of `x0`.
fn interval_end(obj: &Objective, w: &[Vec<Vec<f64>>], c: Coord, x0: f64, cutoff: f64, toward: f64) -> f64 {
    if obj.at(w, c, toward) >= cutoff {
        return toward;
    }
    let (mut inside, mut outside) = (x0, toward);
    for _ in 0..20 {
        let mid = 0.5 * (inside + outside);
        if obj.at(w, c, mid) >= cutoff {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// Maximum-likelihood transition matrices by multi-start projected
/// coordinate ascent on the exact forward likelihood.
///
/// Start 0 uses uniform columns; start `s > 0` draws each column from a flat
/// Dirichlet with sub-seed `s`. Each coordinate step scans one entry of one
/// column (the others rescaled) and refines the best scan point by golden
/// section; the first sweep scans all of `[0, 1]`, later sweeps only a
/// neighbourhood of the current value. The fitted entries carry conditional
/// likelihood-ratio intervals.
pub fn infer_transitions(
    skeleton: &DemographicHmm,
    observations: &[Observation],
    config: &AscentConfig,
    seed: u64,
) -> Result<InferenceResult, DemographyError> {
    let (n, k) = (skeleton.regime_count(), skeleton.climate_states);
    if n > 4 || k > 3 {
        return Err(DemographyError::SearchSpaceTooLarge { regimes: n, climates: k });
    }
    if observations.is_empty() {
        return Err(DemographyError::NoObservations);
    }
    if config.scan_points < 3 {
        return Err(DemographyError::InvalidModel("scan_points must be at least 3".into()));
    }
    let graph = LikelihoodGraph::new(skeleton, observations)?;
    if n == 1 {
        return Ok(InferenceResult {
            model: skeleton.clone(),
            log_likelihood: graph.log_likelihood(skeleton)?,
            converged: true,
            sweeps: 0,
            best_start: 0,
            intervals: Vec::new(),
            warnings: Vec::new(),
        });
    }
    let obj = Objective { graph: &graph };
    let coords = coordinates(n, k);
    let starts: Vec<Vec<Vec<Vec<f64>>>> = std::iter::once(vec![vec![vec![1.0 / n as f64; n]; n]; k])
        .chain((1..=config.extra_starts).map(|s| random_start(n, k, rng::derive_seed(seed, s as u64))))
        .collect();
    let runs: Vec<(usize, Vec<Vec<Vec<f64>>>, f64, bool, usize)> = starts
        .into_par_iter()
        .enumerate()
        .map(|(s, mut w)| {
            let mut value = graph.evaluate(&w);
            let mut converged = false;
            let mut sweeps = 0;
            while sweeps < config.max_sweeps {
                sweeps += 1;
                let before = value;
                for &c in &coords {
                    let (x, v, _) = if sweeps == 1 {
                        obj.line_search(&w, c, config.scan_points)
                    } else {
                        obj.local_search(&w, c, config.scan_points)
                    };
                    if v > value {
                        set_entry(&mut w, c, x);
                        value = v;
                    }
                }
                if value - before < config.tolerance {
                    converged = value.is_finite();
                    break;
                }
            }
            (s, w, value, converged, sweeps)
        })
        .collect();
    let (best_start, w, value, converged, sweeps) =
        runs.into_iter().reduce(|a, b| if b.2 > a.2 { b } else { a }).expect("at least one start");
    if value == f64::NEG_INFINITY {
        return Err(DemographyError::NegativeInfinity("no start reached a positive likelihood".into()));
    }
    let mut warnings = Vec::new();
    if !converged {
        warnings.push(format!("coordinate ascent stopped after {sweeps} sweeps without converging"));
    }
    let cutoff = value - CHI2_95 / 2.0;
    let mut intervals = Vec::new();
    for &c in &coords {
        let x0 = w[c.climate][c.row][c.column];
        let (_, _, scan_range) = obj.line_search(&w, c, config.scan_points);
        intervals.push(ParameterInterval {
            climate: c.climate,
            row: c.row,
            column: c.column,
            estimate: x0,
            lower: interval_end(&obj, &w, c, x0, cutoff, 0.0),
            upper: interval_end(&obj, &w, c, x0, cutoff, 1.0),
            scan_range,
        });
    }
    if intervals.iter().all(|i| i.scan_range < FLAT_LIKELIHOOD) {
        warnings
            .push("likelihood is flat in every transition entry: the transitions are not identifiable from these data".into());
    } else {
        for i in intervals.iter().filter(|i| i.scan_range < FLAT_LIKELIHOOD) {
            warnings.push(format!(
                "likelihood is flat in transition entry ({}, {}) of climate {}: not identifiable",
                i.row, i.column, i.climate
            ));
        }
    }
    let mut model = skeleton.clone();
    model.transitions = w;
    Ok(InferenceResult { model, log_likelihood: value, converged, sweeps, best_start, intervals, warnings })
}
