//! Drift–diffusion fields over a 2-D state space.
//!
//! Fields are estimated from short trajectories, sampled forward with
//! Euler–Maruyama, queried for return-cycle probabilities and decomposed into
//! potential and stream-function parts.

mod cycles;
mod estimate;
mod field;
mod helmholtz;
mod plot;
mod sample;

pub use self::cycles::{return_probability, CycleEstimate, CycleQuery};
pub use self::estimate::{estimate_drift_diffusion, estimate_from_transitions, transitions_from_dataset, Transition};
pub use self::field::{DriftDiffusionField, GridSpec};
pub use self::helmholtz::{helmholtz_decompose, DecompositionMode, HelmholtzDecomposition};
pub use self::plot::render_field_svg;
pub use self::sample::{sample_sde, SampledTrajectory, Termination};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SdeError {
    #[error("grid needs finite increasing ranges and at least 2 nodes per axis")]
    InvalidGrid,
    #[error("grid must be at least 3x3, got {nx}x{ny}")]
    GridTooSmall { nx: usize, ny: usize },
    #[error("field arrays do not match the grid's {expected} nodes")]
    ShapeMismatch { expected: usize },
    #[error("bandwidth must be positive and finite, got {0}")]
    InvalidBandwidth(f64),
    #[error("no usable consecutive observation pairs")]
    NoUsablePairs,
    #[error("non-positive time gap {gap} in pair {index}")]
    NonPositiveGap { index: usize, gap: f64 },
    #[error("point ({0}, {1}) lies outside the grid")]
    OutsideGrid(f64, f64),
    #[error("point ({0}, {1}) touches an unsupported node")]
    Unsupported(f64, f64),
    #[error("time step and horizon must be positive and finite")]
    InvalidTime,
    #[error("epsilon2 must satisfy 0 < epsilon2 < epsilon1")]
    InvalidEpsilon,
    #[error("field has no supported node")]
    NoSupport,
    #[error("variable `{0}` not in dataset")]
    UnknownVariable(String),
}
