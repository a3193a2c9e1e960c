//! Time-homogeneous null models for pooled-state clustering.
//!
//! A first-order kernel with no attractor, run as many short transients from
//! varied starts, can still pile its pooled values into separated clusters.
//! This module fits such kernels, generates the ensembles and measures the
//! resulting multimodality.

mod demo;
mod dip;
mod ensemble;

pub use self::demo::{variance_gradient_demo, VarianceProfile, DEMO_DOMAIN};
pub(crate) use self::dip::quantile;
pub use self::dip::{bimodality_test, dip_statistic, freedman_diaconis, modes, BimodalityReport, Histogram, MIN_BOOTSTRAP};
pub use self::ensemble::{
    fit_conditional_kernel, generate_ensemble, histogram_svg, jitter_within_bins, reference_config, reference_kernel,
    run_null_model, Discrete, EnsembleSpec, NullModelConfig, NullModelRun, REFERENCE_SEED,
};

use crate::dataset::DatasetError;
use crate::markov::MarkovError;

#[derive(Debug, thiserror::Error)]
pub enum NullModelError {
    #[error("need at least {needed} values, found {found}")]
    TooFewValues { needed: usize, found: usize },
    #[error("values must be finite")]
    NonFinite,
    #[error("need at least 1000 bootstrap replicates, got {0}")]
    TooFewBootstrap(usize),
    #[error("value {0} lies outside the binned range")]
    OutOfRange(f64),
    #[error("distribution invalid: {0}")]
    InvalidDistribution(String),
    #[error("ensemble has no series")]
    EmptyEnsemble,
    #[error("variance must be positive everywhere: {0}")]
    NonPositiveVariance(String),
    #[error(transparent)]
    Markov(#[from] MarkovError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}
