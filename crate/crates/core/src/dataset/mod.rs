//! Multi-series datasets plus the descriptive statistics built on them.

mod csv;
mod pca;
mod scaling;
mod window;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use self::csv::{load_dataset, write_dataset, ColumnMapping};
pub use self::pca::{run_pca, Impute, PcaResult};
pub use self::scaling::{fit_temporal_scaling, ScalingFit};
pub use self::window::{sliding_window_mean, WindowCurve, DEFAULT_MIN_COUNT, WINDOW_CENTERS};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] ::csv::Error),
    #[error("column `{0}` not found in header")]
    MissingColumn(String),
    #[error("schema must name at least one variable column")]
    NoVariables,
    #[error("row {row}: unparseable time `{value}`")]
    InvalidTime { row: u64, value: String },
    #[error("row {row}: unparseable value `{value}` in column `{column}`")]
    InvalidValue { row: u64, column: String, value: String },
    #[error("row {row}: empty series id")]
    EmptySeriesId { row: u64 },
    #[error("series `{series}` has two observations at time {time}")]
    DuplicateTimestamp { series: String, time: f64 },
    #[error("series id `{0}` appears twice")]
    DuplicateSeries(String),
    #[error("observation has {found} values, expected {expected}")]
    WrongArity { expected: usize, found: usize },
    #[error("need at least {needed} usable observations, found {found}")]
    TooFewObservations { needed: usize, found: usize },
    #[error("all observations are identical; nothing to decompose")]
    ZeroVariance,
    #[error("variable `{0}` has no observed values")]
    EmptyVariable(String),
    #[error("window width must be positive, got {0}")]
    InvalidWidth(f64),
    #[error("min_count must be at least 1")]
    InvalidMinCount,
    #[error("non-positive value {value} at time {time} inside the fit window")]
    NonPositiveValue { time: f64, value: f64 },
    #[error("need at least 3 paired observations inside the window, found {0}")]
    TooFewPairs(usize),
    #[error("all x values coincide; the slope is undefined")]
    DegenerateX,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub time: f64,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub id: String,
    pub observations: Vec<Observation>,
}

impl Series {
    /// Values of variable `var` with their times, skipping missing entries.
    pub fn column(&self, var: usize) -> Vec<(f64, f64)> {
        self.observations.iter().filter_map(|o| o.values[var].map(|v| (o.time, v))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub series: Vec<Series>,
    pub variable_names: Vec<String>,
    pub variable_count: usize,
}

impl Dataset {
    /// Validates and normalises: sorts each series by time, drops observations
    /// with no observed entry, rejects duplicate times and duplicate ids.
    pub fn new(variable_names: Vec<String>, mut series: Vec<Series>) -> Result<Self, DatasetError> {
        let variable_count = variable_names.len();
        if variable_count == 0 {
            return Err(DatasetError::NoVariables);
        }
        let mut ids = HashSet::new();
        for s in &mut series {
            if s.id.is_empty() {
                return Err(DatasetError::EmptySeriesId { row: 0 });
            }
            if !ids.insert(s.id.clone()) {
                return Err(DatasetError::DuplicateSeries(s.id.clone()));
            }
            for o in &s.observations {
                if o.values.len() != variable_count {
                    return Err(DatasetError::WrongArity { expected: variable_count, found: o.values.len() });
                }
            }
            s.observations.retain(|o| o.values.iter().any(Option::is_some));
            s.observations.sort_by(|a, b| a.time.total_cmp(&b.time));
            if let Some(w) = s.observations.windows(2).find(|w| w[0].time == w[1].time) {
                return Err(DatasetError::DuplicateTimestamp { series: s.id.clone(), time: w[0].time });
            }
        }
        Ok(Dataset { series, variable_names, variable_count })
    }

    /// A one-variable dataset from plain `(time, value)` series.
    pub fn univariate(name: &str, series: Vec<(String, Vec<(f64, f64)>)>) -> Result<Self, DatasetError> {
        let series = series
            .into_iter()
            .map(|(id, pts)| Series {
                id,
                observations: pts.into_iter().map(|(time, v)| Observation { time, values: vec![Some(v)] }).collect(),
            })
            .collect();
        Dataset::new(vec![name.to_string()], series)
    }

    pub fn observation_count(&self) -> usize {
        self.series.iter().map(|s| s.observations.len()).sum()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variable_names.iter().position(|v| v == name)
    }

    pub fn series_by_id(&self, id: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.id == id)
    }

    /// Every observed value of variable `var`, pooled across series.
    pub fn pooled(&self, var: usize) -> Vec<f64> {
        self.series.iter().flat_map(|s| s.observations.iter().filter_map(move |o| o.values[var])).collect()
    }
}
