use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::HingeError;
use crate::rng;

/// Number of quantile levels the initial breakpoint grid is built from.
pub const GRID_SIZE: usize = 24;

const SWEEPS: usize = 200;
const LINE_POINTS: usize = 21;
const GOLDEN_TOL: f64 = 1e-12;

/// Continuous piecewise-linear least-squares fit.
///
/// Segment `i` covers `[breakpoints[i-1], breakpoints[i])`, so a point on a
/// breakpoint belongs to the segment on its right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HingeFit {
    pub breakpoints: Vec<f64>,
    pub segment_slopes: Vec<f64>,
    pub segment_intercepts: Vec<f64>,
    pub sse: f64,
    pub bic: f64,
    pub n_points: usize,
}

impl HingeFit {
    pub fn n_breaks(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn segment_of(&self, x: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= x)
    }

    pub fn predict(&self, x: f64) -> f64 {
        let s = self.segment_of(x);
        self.segment_intercepts[s] + self.segment_slopes[s] * x
    }

    /// Largest jump between adjacent segment values at any breakpoint.
    pub fn continuity_gap(&self) -> f64 {
        self.breakpoints
            .iter()
            .enumerate()
            .map(|(i, &b)| {
                let l = self.segment_intercepts[i] + self.segment_slopes[i] * b;
                let r = self.segment_intercepts[i + 1] + self.segment_slopes[i + 1] * b;
                (l - r).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Points rescaled to `u = (x - x_min) / range` so that the search is
/// translation and scale free.
struct Problem {
    u: Vec<f64>,
    y: Vec<f64>,
    x_min: f64,
    range: f64,
    lo: f64,
    hi: f64,
}

struct Solution {
    coef: Vec<f64>,
    sse: f64,
}

impl Problem {
    fn new(points: &[(f64, f64)], n_breaks: usize) -> Result<Self, HingeError> {
        let needed = 2 * (n_breaks + 1) + n_breaks;
        if points.len() < needed {
            return Err(HingeError::TooFewPoints { needed, breaks: n_breaks, found: points.len() });
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(HingeError::NonFinite);
        }
        let x_min = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let x_max = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let range = x_max - x_min;
        if !(range > 0.0) {
            return Err(HingeError::DegenerateX);
        }
        let margin = 1e-9;
        Ok(Problem {
            u: points.iter().map(|p| (p.0 - x_min) / range).collect(),
            y: points.iter().map(|p| p.1).collect(),
            x_min,
            range,
            lo: margin,
            hi: 1.0 - margin,
        })
    }

    fn row(&self, i: usize, breaks: &[f64], out: &mut [f64]) {
        let u = self.u[i];
        out[0] = 1.0;
        out[1] = u;
        for (k, b) in breaks.iter().enumerate() {
            out[2 + k] = (u - b).max(0.0);
        }
    }

    /// Least squares for fixed breakpoints via the normal equations with a
    /// pseudo-inverse and one refinement step.
    fn solve(&self, breaks: &[f64]) -> Solution {
        let p = 2 + breaks.len();
        let mut gram = DMatrix::<f64>::zeros(p, p);
        let mut rhs = DVector::<f64>::zeros(p);
        let mut row = vec![0.0; p];
        for i in 0..self.u.len() {
            self.row(i, breaks, &mut row);
            for a in 0..p {
                rhs[a] += row[a] * self.y[i];
                for b in a..p {
                    gram[(a, b)] += row[a] * row[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                gram[(a, b)] = gram[(b, a)];
            }
        }
        let svd = gram.svd(true, true);
        let tol = 1e-13 * svd.singular_values.max();
        let solve = |v: &DVector<f64>| svd.solve(v, tol).unwrap_or_else(|_| DVector::zeros(p));
        let mut coef = solve(&rhs);
        for _ in 0..2 {
            let mut corr = DVector::<f64>::zeros(p);
            for i in 0..self.u.len() {
                self.row(i, breaks, &mut row);
                let r = self.y[i] - row.iter().zip(coef.iter()).map(|(a, c)| a * c).sum::<f64>();
                for a in 0..p {
                    corr[a] += row[a] * r;
                }
            }
            coef += solve(&corr);
        }
        let coef: Vec<f64> = coef.iter().copied().collect();
        let sse = (0..self.u.len())
            .map(|i| {
                self.row(i, breaks, &mut row);
                let r = self.y[i] - row.iter().zip(&coef).map(|(a, c)| a * c).sum::<f64>();
                r * r
            })
            .sum();
        Solution { coef, sse }
    }

    fn sse(&self, breaks: &[f64]) -> f64 {
        self.solve(breaks).sse
    }

    fn quantile_grid(&self) -> Vec<f64> {
        let mut sorted = self.u.clone();
        sorted.sort_by(f64::total_cmp);
        let mut g: Vec<f64> = (1..=GRID_SIZE)
            .map(|i| crate::nullmodel::quantile(&sorted, i as f64 / (GRID_SIZE + 1) as f64))
            .filter(|q| *q > self.lo && *q < self.hi)
            .collect();
        g.dedup();
        g
    }

    /// Exhaustive search over grid combinations when cheap, evenly spaced
    /// grid points otherwise.
    fn grid_start(&self, n_breaks: usize) -> Vec<f64> {
        let grid = self.quantile_grid();
        if grid.len() < n_breaks {
            return (1..=n_breaks).map(|k| k as f64 / (n_breaks + 1) as f64).collect();
        }
        if binomial(grid.len(), n_breaks) > 5000 {
            return (1..=n_breaks).map(|k| grid[k * grid.len() / (n_breaks + 1)]).collect();
        }
        let mut best = (f64::INFINITY, Vec::new());
        let mut idx: Vec<usize> = (0..n_breaks).collect();
        loop {
            let b: Vec<f64> = idx.iter().map(|&i| grid[i]).collect();
            let s = self.sse(&b);
            if s < best.0 {
                best = (s, b);
            }
            if !next_combination(&mut idx, grid.len()) {
                break;
            }
        }
        best.1
    }

    /// Coordinate descent: each breakpoint is searched between its
    /// neighbours by a coarse scan followed by golden section.
    fn refine(&self, mut b: Vec<f64>) -> (Vec<f64>, f64) {
        let mut current = self.sse(&b);
        for _ in 0..SWEEPS {
            let before = current;
            for k in 0..b.len() {
                let lo = if k == 0 { self.lo } else { b[k - 1] + 1e-9 };
                let hi = if k + 1 == b.len() { self.hi } else { b[k + 1] - 1e-9 };
                if hi <= lo {
                    continue;
                }
                let mut trial = b.clone();
                let mut eval = |v: f64| {
                    trial[k] = v;
                    self.sse(&trial)
                };
                let step = (hi - lo) / (LINE_POINTS - 1) as f64;
                let (mut bi, mut bs) = (0, f64::INFINITY);
                for j in 0..LINE_POINTS {
                    let s = eval(lo + step * j as f64);
                    if s < bs {
                        bi = j;
                        bs = s;
                    }
                }
                let a = lo + step * bi.saturating_sub(1) as f64;
                let c = (lo + step * (bi + 1) as f64).min(hi);
                let (v, s) = golden(a, c, &mut eval);
                let (v, s) = if s <= bs { (v, s) } else { (lo + step * bi as f64, bs) };
                if s < current {
                    b[k] = v;
                    current = s;
                }
            }
            if before - current <= 1e-15 * before.max(1e-300) {
                break;
            }
        }
        (b, current)
    }

    fn finish(&self, breaks: Vec<f64>) -> HingeFit {
        let sol = self.solve(&breaks);
        let n = self.u.len();
        let m = breaks.len();
        // Coefficients are in u; convert to x.
        let scale = self.range;
        let (a, b0) = (sol.coef[0], sol.coef[1]);
        let mut slopes = Vec::with_capacity(m + 1);
        let mut intercepts = Vec::with_capacity(m + 1);
        let (mut slope_u, mut icpt_u) = (b0, a);
        slopes.push(slope_u / scale);
        intercepts.push(icpt_u - slope_u / scale * self.x_min);
        for k in 0..m {
            let c = sol.coef[2 + k];
            slope_u += c;
            icpt_u -= c * breaks[k];
            slopes.push(slope_u / scale);
            intercepts.push(icpt_u - slope_u / scale * self.x_min);
        }
        let y_scale = {
            let mean = self.y.iter().sum::<f64>() / n as f64;
            let sd = (self.y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
            if sd > 0.0 {
                sd
            } else {
                mean.abs().max(1.0)
            }
        };
        let floor = n as f64 * (1e-8 * y_scale).powi(2);
        let k = (2 + 2 * m) as f64;
        let bic = n as f64 * (sol.sse.max(floor) / n as f64).ln() + k * (n as f64).ln();
        HingeFit {
            breakpoints: breaks.iter().map(|b| self.x_min + b * self.range).collect(),
            segment_slopes: slopes,
            segment_intercepts: intercepts,
            sse: sol.sse,
            bic,
            n_points: n,
        }
    }
}

fn golden(mut a: f64, mut b: f64, f: &mut impl FnMut(f64) -> f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > GOLDEN_TOL {
        if fc <= fd {
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
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Fits a continuous piecewise-linear function with `n_breaks` breakpoints.
///
/// Restart 0 starts from the best quantile-grid combination; the others start
/// from sorted uniform draws (sub-seed `r` of `seed`). Every start is refined
/// by coordinate descent and the lowest SSE wins, earliest restart on ties.
pub fn fit_sawtooth(points: &[(f64, f64)], n_breaks: usize, restarts: usize, seed: u64) -> Result<HingeFit, HingeError> {
    if restarts == 0 {
        return Err(HingeError::NoRestarts);
    }
    let prob = Problem::new(points, n_breaks)?;
    if n_breaks == 0 {
        return Ok(prob.finish(Vec::new()));
    }
    let best = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                prob.grid_start(n_breaks)
            } else {
                let mut g = rng::substream(seed, r as u64);
                let mut b: Vec<f64> = (0..n_breaks).map(|_| prob.lo + (prob.hi - prob.lo) * g.random::<f64>()).collect();
                b.sort_by(f64::total_cmp);
                b
            };
            let (b, s) = prob.refine(start);
            (r, b, s)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .min_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)))
        .expect("restarts >= 1");
    Ok(prob.finish(best.1))
}

/// Fits 0..=max_breaks breakpoints and returns the minimum-BIC fit, fewer
/// breakpoints on ties. Counts the data cannot support are skipped.
pub fn select_breakpoint_count(
    points: &[(f64, f64)],
    max_breaks: usize,
    restarts: usize,
    seed: u64,
) -> Result<HingeFit, HingeError> {
    let mut best = fit_sawtooth(points, 0, restarts, seed)?;
    for m in 1..=max_breaks {
        let fit = match fit_sawtooth(points, m, restarts, seed) {
            Ok(f) => f,
            Err(HingeError::TooFewPoints { .. }) => break,
            Err(e) => return Err(e),
        };
        if fit.bic < best.bic {
            best = fit;
        }
    }
    Ok(best)
}
