//! Age-structured population projection and a regime-switching hidden
//! Markov model with climate-indexed transitions, radiocarbon and skeletal
//! emissions.

mod forward;
mod hmm;
mod infer;
mod leslie;

use std::io::Write;

pub use self::forward::{brute_force_log_likelihood, forward_log_likelihood, LikelihoodGraph, STATE_BUDGET};
pub use self::hmm::{
    read_observations, sample_radiocarbon, simulate_hmm, write_observations, DemographicHmm, HmmSimulation, Observation, Z0Policy,
};
pub use self::infer::{infer_transitions, AscentConfig, InferenceResult, ParameterInterval, CHI2_95, FLAT_LIKELIHOOD};
pub use self::leslie::{is_primitive, leslie_matrix, project_population, stable_structure, LeslieModel, StableDemography};

use crate::svg::{Bounds, Plot};

#[derive(Debug, thiserror::Error)]
pub enum DemographyError {
    #[error("{fertility} fertilities need {} survivals, found {survival}", fertility.saturating_sub(1))]
    LengthMismatch { fertility: usize, survival: usize },
    #[error("{0}")]
    InvalidRate(String),
    #[error("expected {expected} age classes, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("population entries must be finite and non-negative, found {0}")]
    NegativePopulation(f64),
    #[error("projection matrix is not primitive; no unique stable structure")]
    NotPrimitive,
    #[error("power iteration did not converge in {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("climate path covers {found} periods, need {needed}")]
    ClimatePathTooShort { needed: usize, found: usize },
    #[error("invalid {kind} payload `{payload}`")]
    InvalidPayload { kind: String, payload: String },
    #[error("observation period {period} outside [0, {periods})")]
    PeriodOutOfRange { period: usize, periods: usize },
    #[error("log-likelihood is -inf: {0}")]
    NegativeInfinity(String),
    #[error("forward recursion exceeded {0} states")]
    StateBudgetExceeded(usize),
    #[error("fitting supports at most 4 regimes and 3 climate states, got {regimes} and {climates}")]
    SearchSpaceTooLarge { regimes: usize, climates: usize },
    #[error("at least one observation is required")]
    NoObservations,
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One row per period: `period,regime,total,z0..zJ`.
pub fn write_trajectory(sim: &HmmSimulation, writer: impl Write) -> Result<(), DemographyError> {
    let mut w = csv::Writer::from_writer(writer);
    let classes = sim.populations.first().map_or(0, |z| z.len());
    let mut header = vec!["period".to_string(), "regime".into(), "total".into()];
    header.extend((0..classes).map(|j| format!("z{j}")));
    w.write_record(&header)?;
    for (t, z) in sim.populations.iter().enumerate() {
        let mut row = vec![t.to_string(), sim.path[t].to_string(), sim.annual_totals[t].to_string()];
        row.extend(z.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Total population against period, with regime changes marked.
pub fn render_population_svg(sim: &HmmSimulation) -> String {
    let pts: Vec<(f64, f64)> = sim.annual_totals.iter().enumerate().map(|(t, v)| (t as f64, *v)).collect();
    let bounds = Bounds::from_points(&pts).unwrap_or(Bounds { x_min: 0.0, x_max: 1.0, y_min: 0.0, y_max: 1.0 });
    let mut plot = Plot::new(bounds, 720.0, 400.0);
    for t in 1..sim.path.len() {
        if sim.path[t] != sim.path[t - 1] {
            plot.dashed(t as f64, "#bbbbbb");
        }
    }
    plot.polyline(&pts, "#2171b5", 1.5);
    plot.finish("total population", "period", "females")
}
