//! Exact likelihood of radiocarbon and skeletal observations, marginalised
//! over regime paths.
//!
//! The radiocarbon term `prod_t (tot_t / S)^{n_t}` couples all periods through
//! `S = sum_t tot_t`. Writing
//! `S^{-N} = Gamma(N)^{-1} int exp(N s - e^s S) ds`
//! makes the integrand a product over periods, so for each quadrature node
//! the path sum is an ordinary forward recursion. States reached by
//! different histories with the same regime, population vector and open
//! skeletal-window sums are merged.

use std::collections::HashMap;

use super::{DemographicHmm, DemographyError, Observation};

/// Maximum number of merged states over all periods.
pub const STATE_BUDGET: usize = 2_000_000;

const TAIL_NATS: f64 = 40.0;
const COARSE_DROP_NATS: f64 = 10.0;
const MAX_ENUMERATED_PATHS: usize = 2_000_000;

struct Window {
    start: usize,
    end: usize,
    counts: Vec<u64>,
}

/// Observations aggregated per period and per dating window.
struct Emissions {
    c14: Vec<u64>,
    total_c14: u64,
    windows: Vec<Window>,
}

impl Emissions {
    fn new(model: &DemographicHmm, observations: &[Observation]) -> Result<Self, DemographyError> {
        let periods = model.periods();
        let classes = model.classes();
        let mut c14 = vec![0u64; periods];
        let mut windows: HashMap<(usize, usize), Vec<u64>> = HashMap::new();
        for o in observations {
            let p = o.period();
            if p >= periods {
                return Err(DemographyError::PeriodOutOfRange { period: p, periods });
            }
            match *o {
                Observation::Radiocarbon { count, .. } => c14[p] += count,
                Observation::Skeletal { age_class, window_radius, .. } => {
                    if age_class >= classes {
                        return Err(DemographyError::InvalidPayload { kind: o.kind().into(), payload: o.payload() });
                    }
                    let key = (p.saturating_sub(window_radius), (p.saturating_add(window_radius)).min(periods - 1));
                    windows.entry(key).or_insert_with(|| vec![0; classes])[age_class] += 1;
                }
            }
        }
        let mut windows: Vec<Window> = windows.into_iter().map(|((start, end), counts)| Window { start, end, counts }).collect();
        windows.sort_by_key(|w| (w.start, w.end));
        Ok(Emissions { total_c14: c14.iter().sum(), c14, windows })
    }
}

#[derive(Clone)]
struct State {
    regime: usize,
    z: Vec<f64>,
    tot: f64,
    log_emit: f64,
    /// Open skeletal windows: index and per-class population sums so far.
    open: Vec<(usize, Vec<f64>)>,
}

struct Layer {
    states: Vec<State>,
    /// `incoming[b]` lists the parent indices of state `b`.
    incoming: Vec<Vec<usize>>,
    /// Range of the partial sum of totals over paths reaching each state.
    partial: Vec<(f64, f64)>,
}

/// Merged state graph for one model structure and observation set. Only the
/// transition probabilities may change between evaluations.
pub struct LikelihoodGraph {
    layers: Vec<Layer>,
    climate: Vec<usize>,
    initial: Vec<f64>,
    total_c14: u64,
    sum_range: (f64, f64),
    states: usize,
}

fn quantise(v: f64) -> i64 {
    if v <= 0.0 {
        i64::MIN
    } else {
        (v.ln() * 1e11).round() as i64
    }
}

fn make_state(em: &Emissions, t: usize, regime: usize, z: Vec<f64>, inherited: &[(usize, Vec<f64>)]) -> State {
    let tot: f64 = z.iter().sum();
    let mut log_emit = 0.0;
    let n = em.c14[t];
    if n > 0 {
        log_emit += n as f64 * tot.ln();
    }
    let mut open: Vec<(usize, Vec<f64>)> = inherited.to_vec();
    for (i, w) in em.windows.iter().enumerate() {
        if w.start == t {
            open.push((i, vec![0.0; z.len()]));
        }
    }
    open.sort_by_key(|o| o.0);
    for (_, sums) in open.iter_mut() {
        for (s, v) in sums.iter_mut().zip(&z) {
            *s += v;
        }
    }
    open.retain(|(i, sums)| {
        let w = &em.windows[*i];
        if w.end != t {
            return true;
        }
        let den: f64 = sums.iter().sum();
        for (c, s) in w.counts.iter().zip(sums) {
            if *c > 0 {
                log_emit += *c as f64 * (s / den).ln();
            }
        }
        false
    });
    if log_emit.is_nan() {
        log_emit = f64::NEG_INFINITY;
    }
    State { regime, z, tot, log_emit, open }
}

fn state_key(s: &State) -> (usize, Vec<i64>) {
    let mut k: Vec<i64> = s.z.iter().map(|v| quantise(*v)).collect();
    for (i, sums) in &s.open {
        k.push(*i as i64);
        k.extend(sums.iter().map(|v| quantise(*v)));
    }
    (s.regime, k)
}

impl LikelihoodGraph {
    pub fn new(model: &DemographicHmm, observations: &[Observation]) -> Result<Self, DemographyError> {
        model.validate()?;
        let periods = model.periods();
        if periods == 0 {
            return Err(DemographyError::InvalidModel("the climate path defines zero periods".into()));
        }
        let em = Emissions::new(model, observations)?;
        let n = model.regime_count();
        let mut states = 0usize;
        let mut layers: Vec<Layer> = Vec::with_capacity(periods);
        let mut first = Layer { states: Vec::new(), incoming: Vec::new(), partial: Vec::new() };
        for q in 0..n {
            if model.initial_distribution[q] > 0.0 {
                let s = make_state(&em, 0, q, model.initial_population(q)?, &[]);
                if s.log_emit > f64::NEG_INFINITY {
                    first.partial.push((s.tot, s.tot));
                    first.states.push(s);
                    first.incoming.push(Vec::new());
                }
            }
        }
        check_alive(&first, 0)?;
        states += first.states.len();
        layers.push(first);
        for t in 1..periods {
            let prev = layers.last().expect("non-empty");
            let mut next = Layer { states: Vec::new(), incoming: Vec::new(), partial: Vec::new() };
            let mut index: HashMap<(usize, Vec<i64>), usize> = HashMap::new();
            for (a, parent) in prev.states.iter().enumerate() {
                let z = model.regimes[parent.regime].apply(&parent.z);
                for q in 0..n {
                    let s = make_state(&em, t, q, z.clone(), &parent.open);
                    if s.log_emit == f64::NEG_INFINITY {
                        continue;
                    }
                    let (lo, hi) = prev.partial[a];
                    let key = state_key(&s);
                    match index.get(&key) {
                        Some(&b) => {
                            next.incoming[b].push(a);
                            let p = &mut next.partial[b];
                            *p = (p.0.min(lo + s.tot), p.1.max(hi + s.tot));
                        }
                        None => {
                            index.insert(key, next.states.len());
                            next.partial.push((lo + s.tot, hi + s.tot));
                            next.incoming.push(vec![a]);
                            next.states.push(s);
                        }
                    }
                }
            }
            check_alive(&next, t)?;
            states += next.states.len();
            if states > STATE_BUDGET {
                return Err(DemographyError::StateBudgetExceeded(STATE_BUDGET));
            }
            layers.push(next);
        }
        let last = layers.last().expect("non-empty");
        let sum_range = last.partial.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.0), hi.max(p.1)));
        Ok(LikelihoodGraph {
            layers,
            climate: model.climate_path.clone(),
            initial: model.initial_distribution.clone(),
            total_c14: em.total_c14,
            sum_range,
            states,
        })
    }

    pub fn state_count(&self) -> usize {
        self.states
    }

    /// Log path-sum of `exp(-lambda S)` times all emissions, for each
    /// `lambda` in `lambdas`.
    fn path_sums(&self, transitions: &[Vec<Vec<f64>>], lambdas: &[f64]) -> Vec<f64> {
        let m = lambdas.len();
        let first = &self.layers[0];
        let mut cur = vec![f64::NEG_INFINITY; first.states.len() * m];
        for (a, s) in first.states.iter().enumerate() {
            let base = self.initial[s.regime].ln() + s.log_emit;
            for (i, l) in lambdas.iter().enumerate() {
                cur[a * m + i] = base - l * s.tot;
            }
        }
        for t in 1..self.layers.len() {
            let prev = &self.layers[t - 1];
            let layer = &self.layers[t];
            let w = &transitions[self.climate[t - 1]];
            let mut next = vec![f64::NEG_INFINITY; layer.states.len() * m];
            for (b, s) in layer.states.iter().enumerate() {
                let row = &mut next[b * m..(b + 1) * m];
                for &a in &layer.incoming[b] {
                    let p = w[s.regime][prev.states[a].regime];
                    if !(p > 0.0) {
                        continue;
                    }
                    let lp = p.ln();
                    for (r, x) in row.iter_mut().zip(&cur[a * m..(a + 1) * m]) {
                        *r = log_add(*r, x + lp);
                    }
                }
                for (r, l) in row.iter_mut().zip(lambdas) {
                    *r += s.log_emit - l * s.tot;
                }
            }
            cur = next;
        }
        (0..m).map(|i| cur.iter().skip(i).step_by(m).fold(f64::NEG_INFINITY, |acc, &v| log_add(acc, v))).collect()
    }

    /// Log-likelihood under the transition matrices of `model`.
    pub fn log_likelihood(&self, model: &DemographicHmm) -> Result<f64, DemographyError> {
        let value = self.evaluate(&model.transitions);
        if value == f64::NEG_INFINITY {
            return Err(DemographyError::NegativeInfinity(
                "every regime path with positive probability assigns zero probability to the observations".into(),
            ));
        }
        Ok(value)
    }

    /// As [`LikelihoodGraph::log_likelihood`] but returns `-inf` instead of
    /// an error.
    pub(crate) fn evaluate(&self, transitions: &[Vec<Vec<f64>>]) -> f64 {
        let n = self.total_c14;
        if n == 0 {
            return self.path_sums(transitions, &[0.0])[0];
        }
        let nf = n as f64;
        let (s_lo, s_hi) = self.sum_range;
        let (u_left, u_right) = (gamma_tail(nf, -1.0), gamma_tail(nf, 1.0));
        let (a, b) = ((nf / s_hi).ln() + u_left, (nf / s_lo).ln() + u_right);
        let coarse_h = coarse_step(nf);
        let coarse = grid(a, b, coarse_h);
        let g: Vec<f64> = self
            .path_sums(transitions, &coarse.iter().map(|s| s.exp()).collect::<Vec<_>>())
            .iter()
            .zip(&coarse)
            .map(|(f, s)| nf * s + f)
            .collect();
        let peak = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if peak == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let keep: Vec<usize> = (0..g.len()).filter(|&i| g[i] >= peak - TAIL_NATS).collect();
        let lo = (coarse[keep[0]] - coarse_h).max(a);
        let hi = (coarse[*keep.last().expect("peak kept")] + coarse_h).min(b);
        let fine_h = (0.6 / nf.sqrt()).min(0.15);
        let fine = grid(lo, hi, fine_h);
        let h = if fine.len() > 1 { fine[1] - fine[0] } else { fine_h };
        log::debug!("quadrature: {} coarse, {} fine nodes", coarse.len(), fine.len());
        let f = self.path_sums(transitions, &fine.iter().map(|s| s.exp()).collect::<Vec<_>>());
        let total = f.iter().zip(&fine).fold(f64::NEG_INFINITY, |acc, (f, s)| log_add(acc, nf * s + f));
        total + h.ln() - ln_factorial(n - 1)
    }
}

fn check_alive(layer: &Layer, t: usize) -> Result<(), DemographyError> {
    if layer.states.is_empty() {
        return Err(DemographyError::NegativeInfinity(format!(
            "period {t}: every path has zero probability for the observations (zero population with samples?)"
        )));
    }
    Ok(())
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + (-(a - b).abs()).exp().ln_1p()
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Evenly spaced nodes covering `[a, b]` with spacing at most `h`.
fn grid(a: f64, b: f64, h: f64) -> Vec<f64> {
    let k = ((b - a) / h).ceil().max(1.0) as usize;
    (0..=k).map(|i| a + (b - a) * i as f64 / k as f64).collect()
}

/// Offset `u` from the peak of `exp(N u - N e^u)` at which it has dropped by
/// `TAIL_NATS`, on the side given by `sign`.
fn gamma_tail(n: f64, sign: f64) -> f64 {
    let drop = |u: f64| n * (u.exp() - 1.0 - u);
    let (mut lo, mut hi) = (0.0, 1.0);
    while drop(sign * hi) < TAIL_NATS {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if drop(sign * mid) < TAIL_NATS {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    sign * hi
}

/// Coarse spacing at which a single-path peak lying between two nodes is
/// at most `COARSE_DROP_NATS` above the nearer one.
fn coarse_step(n: f64) -> f64 {
    let drop = |h: f64| n * ((h / 2.0).exp() - 1.0 - h / 2.0);
    if drop(1.0) <= COARSE_DROP_NATS {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if drop(mid) <= COARSE_DROP_NATS {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Log-likelihood of the observations marginalised over regime paths.
///
/// Radiocarbon counts contribute `prod_t (tot_t / S)^{n_t}` where `S` sums
/// the annual totals over all `T` periods (the multinomial coefficient is
/// omitted). A skeletal record of class `j` with window `W` contributes
/// `sum_{s in W} z_s[j] / sum_{s in W} tot_s`.
pub fn forward_log_likelihood(model: &DemographicHmm, observations: &[Observation]) -> Result<f64, DemographyError> {
    LikelihoodGraph::new(model, observations)?.log_likelihood(model)
}

/// The same quantity by explicit enumeration of all `N^T` regime paths.
/// Intended as a reference for small models.
pub fn brute_force_log_likelihood(model: &DemographicHmm, observations: &[Observation]) -> Result<f64, DemographyError> {
    model.validate()?;
    let em = Emissions::new(model, observations)?;
    let (n, periods) = (model.regime_count(), model.periods());
    let paths = (n as f64).powi(periods as i32);
    if paths > MAX_ENUMERATED_PATHS as f64 {
        return Err(DemographyError::StateBudgetExceeded(MAX_ENUMERATED_PATHS));
    }
    let mut total = f64::NEG_INFINITY;
    let mut path = vec![0usize; periods];
    'paths: loop {
        let mut lp = model.initial_distribution[path[0]].ln();
        for t in 1..periods {
            lp += model.transition(model.climate_path[t - 1], path[t - 1], path[t]).ln();
        }
        if lp > f64::NEG_INFINITY {
            let mut z = model.initial_population(path[0])?;
            let mut zs = Vec::with_capacity(periods);
            for t in 0..periods {
                let next = model.regimes[path[t]].apply(&z);
                zs.push(std::mem::replace(&mut z, next));
            }
            let tots: Vec<f64> = zs.iter().map(|z| z.iter().sum()).collect();
            let s: f64 = tots.iter().sum();
            for (t, &c) in em.c14.iter().enumerate() {
                if c > 0 {
                    lp += c as f64 * (tots[t] / s).ln();
                }
            }
            for w in &em.windows {
                let den: f64 = tots[w.start..=w.end].iter().sum();
                for (j, &c) in w.counts.iter().enumerate() {
                    if c > 0 {
                        let num: f64 = zs[w.start..=w.end].iter().map(|z| z[j]).sum();
                        lp += c as f64 * (num / den).ln();
                    }
                }
            }
            if !lp.is_nan() {
                total = log_add(total, lp);
            }
        }
        for t in (0..periods).rev() {
            path[t] += 1;
            if path[t] < n {
                continue 'paths;
            }
            path[t] = 0;
        }
        break;
    }
    if total == f64::NEG_INFINITY {
        return Err(DemographyError::NegativeInfinity("every regime path gives zero probability".into()));
    }
    Ok(total)
}
