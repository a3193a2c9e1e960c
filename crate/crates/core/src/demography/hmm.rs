use std::io::{Read, Write};
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{stable_structure, DemographyError, LeslieModel};
use crate::rng::{self, Rng};

/// Initial population given the period-0 regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum Z0Policy {
    /// Stable age distribution of the initial regime scaled to `total`.
    StableFromInitial {
        total: f64,
    },
    Explicit {
        z: Vec<f64>,
    },
}

/// Regime-switching age-structured population model.
///
/// `transitions[k][i][j]` is the probability of moving from regime `j` to
/// regime `i` under climate state `k` (columns sum to 1). The climate at
/// period `t` drives the move from `t` to `t + 1`; its length is the number
/// of periods `T` the likelihood covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemographicHmm {
    pub regimes: Vec<LeslieModel>,
    pub climate_states: usize,
    pub transitions: Vec<Vec<Vec<f64>>>,
    pub climate_path: Vec<usize>,
    pub initial_distribution: Vec<f64>,
    pub z0: Z0Policy,
}

impl DemographicHmm {
    pub fn regime_count(&self) -> usize {
        self.regimes.len()
    }

    pub fn periods(&self) -> usize {
        self.climate_path.len()
    }

    pub fn classes(&self) -> usize {
        self.regimes.first().map_or(0, |r| r.classes())
    }

    pub fn validate(&self) -> Result<(), DemographyError> {
        let n = self.regimes.len();
        let bad = |m: String| Err(DemographyError::InvalidModel(m));
        if n == 0 {
            return bad("at least one regime is required".into());
        }
        for r in &self.regimes {
            r.validate()?;
            if r.classes() != self.classes() {
                return Err(DemographyError::DimensionMismatch { expected: self.classes(), found: r.classes() });
            }
        }
        if self.climate_states == 0 || self.transitions.len() != self.climate_states {
            return bad(format!("expected {} transition matrices, found {}", self.climate_states, self.transitions.len()));
        }
        for (k, w) in self.transitions.iter().enumerate() {
            if w.len() != n || w.iter().any(|r| r.len() != n) {
                return bad(format!("transition matrix {k} must be {n}x{n}"));
            }
            for j in 0..n {
                if w.iter().any(|r| !(r[j] >= 0.0)) {
                    return bad(format!("transition matrix {k} column {j} has a negative entry"));
                }
                let s: f64 = w.iter().map(|r| r[j]).sum();
                if (s - 1.0).abs() > 1e-12 * n as f64 {
                    return bad(format!("transition matrix {k} column {j} sums to {s}"));
                }
            }
        }
        if let Some(c) = self.climate_path.iter().find(|c| **c >= self.climate_states) {
            return bad(format!("climate index {c} out of range"));
        }
        if self.initial_distribution.len() != n
            || self.initial_distribution.iter().any(|p| !(*p >= 0.0))
            || (self.initial_distribution.iter().sum::<f64>() - 1.0).abs() > 1e-12 * n as f64
        {
            return bad("initial distribution must be a probability vector over regimes".into());
        }
        match &self.z0 {
            Z0Policy::StableFromInitial { total } if !(*total >= 0.0) || !total.is_finite() => {
                bad(format!("initial total {total} must be non-negative"))
            }
            Z0Policy::Explicit { z } if z.len() != self.classes() => {
                Err(DemographyError::DimensionMismatch { expected: self.classes(), found: z.len() })
            }
            Z0Policy::Explicit { z } if z.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) => {
                bad("explicit z0 must be non-negative".into())
            }
            _ => Ok(()),
        }
    }

    /// Initial population when the period-0 regime is `q0`.
    pub fn initial_population(&self, q0: usize) -> Result<Vec<f64>, DemographyError> {
        match &self.z0 {
            Z0Policy::Explicit { z } => Ok(z.clone()),
            Z0Policy::StableFromInitial { total } => {
                Ok(stable_structure(&self.regimes[q0])?.u.iter().map(|u| u * total).collect())
            }
        }
    }

    pub(crate) fn transition(&self, climate: usize, from: usize, to: usize) -> f64 {
        self.transitions[climate][to][from]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmmSimulation {
    pub path: Vec<usize>,
    /// `z_0, ..., z_{T-1}`.
    pub populations: Vec<Vec<f64>>,
    pub annual_totals: Vec<f64>,
}

fn categorical(weights: impl Iterator<Item = f64> + Clone, r: &mut Rng) -> usize {
    let u: f64 = r.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        acc += w;
        if w > 0.0 {
            last = i;
        }
        if u < acc {
            return i;
        }
    }
    last
}

/// Samples a regime path and projects the population along it.
pub fn simulate_hmm(model: &DemographicHmm, periods: usize, seed: u64) -> Result<HmmSimulation, DemographyError> {
    model.validate()?;
    if periods == 0 {
        return Err(DemographyError::InvalidModel("at least one period is required".into()));
    }
    if model.climate_path.len() < periods {
        return Err(DemographyError::ClimatePathTooShort { needed: periods, found: model.climate_path.len() });
    }
    let mut r = rng::seeded(seed);
    let n = model.regime_count();
    let mut q = categorical(model.initial_distribution.iter().copied(), &mut r);
    let mut z = model.initial_population(q)?;
    let mut sim =
        HmmSimulation { path: Vec::with_capacity(periods), populations: Vec::with_capacity(periods), annual_totals: Vec::new() };
    for t in 0..periods {
        sim.path.push(q);
        sim.annual_totals.push(z.iter().sum());
        let next = model.regimes[q].apply(&z);
        sim.populations.push(std::mem::replace(&mut z, next));
        let c = model.climate_path[t];
        q = categorical((0..n).map(|i| model.transition(c, q, i)), &mut r);
    }
    Ok(sim)
}

/// One observation line. Radiocarbon counts are dated samples whose years
/// are drawn in proportion to annual population totals; a skeletal record is
/// an individual of `age_class` dated to the window
/// `[period - window_radius, period + window_radius]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observation {
    Radiocarbon { period: usize, count: u64 },
    Skeletal { period: usize, age_class: usize, window_radius: usize },
}

impl Observation {
    pub fn period(&self) -> usize {
        match *self {
            Observation::Radiocarbon { period, .. } | Observation::Skeletal { period, .. } => period,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Observation::Radiocarbon { .. } => "c14",
            Observation::Skeletal { .. } => "skeletal",
        }
    }

    /// `count` for radiocarbon, `age_class:window_radius` for skeletal.
    pub fn payload(&self) -> String {
        match *self {
            Observation::Radiocarbon { count, .. } => count.to_string(),
            Observation::Skeletal { age_class, window_radius, .. } => format!("{age_class}:{window_radius}"),
        }
    }

    pub fn parse(period: usize, kind: &str, payload: &str) -> Result<Self, DemographyError> {
        let bad = || DemographyError::InvalidPayload { kind: kind.to_string(), payload: payload.to_string() };
        match kind {
            "c14" => Ok(Observation::Radiocarbon { period, count: u64::from_str(payload.trim()).map_err(|_| bad())? }),
            "skeletal" => {
                let (a, w) = payload.split_once(':').unwrap_or((payload, "0"));
                Ok(Observation::Skeletal {
                    period,
                    age_class: a.trim().parse().map_err(|_| bad())?,
                    window_radius: w.trim().parse().map_err(|_| bad())?,
                })
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Deserialize)]
struct ObservationRow {
    period: usize,
    kind: String,
    payload: String,
}

/// Reads `period,kind,payload` rows.
pub fn read_observations(reader: impl Read) -> Result<Vec<Observation>, DemographyError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    rdr.deserialize::<ObservationRow>()
        .map(|row| {
            let row = row?;
            Observation::parse(row.period, &row.kind, &row.payload)
        })
        .collect()
}

pub fn write_observations(observations: &[Observation], writer: impl Write) -> Result<(), DemographyError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["period", "kind", "payload"])?;
    for o in observations {
        w.write_record([o.period().to_string(), o.kind().to_string(), o.payload()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Draws `n` radiocarbon sample years with probability proportional to the
/// annual totals and returns one count per period with at least one sample.
pub fn sample_radiocarbon(annual_totals: &[f64], n: u64, seed: u64) -> Result<Vec<Observation>, DemographyError> {
    let total: f64 = annual_totals.iter().sum();
    if !(total > 0.0) || annual_totals.iter().any(|v| !(*v >= 0.0)) {
        return Err(DemographyError::InvalidModel("annual totals must be non-negative with a positive sum".into()));
    }
    let mut r = rng::seeded(seed);
    let mut counts = vec![0u64; annual_totals.len()];
    for _ in 0..n {
        counts[categorical(annual_totals.iter().map(|v| v / total), &mut r)] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c > 0)
        .map(|(period, count)| Observation::Radiocarbon { period, count })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_regime(w: [[f64; 2]; 2], periods: usize) -> DemographicHmm {
        DemographicHmm {
            regimes: vec![LeslieModel::new(vec![1.06], vec![]).unwrap(), LeslieModel::new(vec![0.94], vec![]).unwrap()],
            climate_states: 1,
            transitions: vec![w.iter().map(|r| r.to_vec()).collect()],
            climate_path: vec![0; periods],
            initial_distribution: vec![1.0, 0.0],
            z0: Z0Policy::StableFromInitial { total: 100.0 },
        }
    }

    #[test]
    fn single_regime_is_deterministic() {
        let mut m = two_regime([[1.0, 1.0], [0.0, 0.0]], 5);
        m.regimes.truncate(1);
        m.transitions = vec![vec![vec![1.0]]];
        m.initial_distribution = vec![1.0];
        let s = simulate_hmm(&m, 5, 3).unwrap();
        assert_eq!(s.path, vec![0; 5]);
        assert!((s.annual_totals[4] - 100.0 * 1.06f64.powi(4)).abs() < 1e-9);
    }

    #[test]
    fn identity_transitions_absorb() {
        let m = two_regime([[1.0, 0.0], [0.0, 1.0]], 50);
        assert!(simulate_hmm(&m, 50, 9).unwrap().path.iter().all(|&q| q == 0));
    }

    #[test]
    fn uniform_chain_frequencies() {
        let mut m = two_regime([[0.5, 0.5], [0.5, 0.5]], 100_000);
        m.regimes = vec![LeslieModel::new(vec![1.0], vec![]).unwrap(); 2];
        let s = simulate_hmm(&m, 100_000, 4).unwrap();
        let f = s.path.iter().filter(|&&q| q == 0).count() as f64 / 1e5;
        assert!((f - 0.5).abs() < 0.01, "{f}");
    }

    #[test]
    fn validation() {
        let m = two_regime([[0.9, 0.2], [0.2, 0.8]], 5);
        assert!(matches!(m.validate(), Err(DemographyError::InvalidModel(_))));
        let m = two_regime([[0.9, 0.2], [0.1, 0.8]], 3);
        assert!(matches!(simulate_hmm(&m, 4, 0), Err(DemographyError::ClimatePathTooShort { .. })));
    }

    #[test]
    fn observation_csv_round_trip() {
        let obs = vec![
            Observation::Radiocarbon { period: 2, count: 5 },
            Observation::Skeletal { period: 3, age_class: 1, window_radius: 2 },
        ];
        let mut buf = Vec::new();
        write_observations(&obs, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "period,kind,payload\n2,c14,5\n3,skeletal,1:2\n");
        assert_eq!(read_observations(&buf[..]).unwrap(), obs);
        assert!(read_observations("period,kind,payload\n1,isotope,3\n".as_bytes()).is_err());
    }
}
