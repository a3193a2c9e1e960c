//! Saw-tooth hinge detection on score scatter plots and event-timing
//! classification against the detected thresholds.

mod fit;
mod plot;
mod timing;

pub use self::fit::{fit_sawtooth, select_breakpoint_count, HingeFit, GRID_SIZE};
pub use self::plot::render_hinge_svg;
pub use self::timing::{
    classify_event_timing, mg_timing_report, EventTiming, Label, LabelCounts, Onset, SeriesTiming, TimingReport,
};

#[derive(Debug, thiserror::Error)]
pub enum HingeError {
    #[error("need at least {needed} points for {breaks} breakpoints, found {found}")]
    TooFewPoints { needed: usize, breaks: usize, found: usize },
    #[error("all x values coincide")]
    DegenerateX,
    #[error("coordinates must be finite")]
    NonFinite,
    #[error("restarts must be at least 1")]
    NoRestarts,
    #[error("expected a fit with {expected} breakpoints, got {found}")]
    WrongBreakpointCount { expected: usize, found: usize },
    #[error("event refers to unknown series `{0}`")]
    UnknownSeries(String),
    #[error("onset time {0} is not finite")]
    InvalidOnset(f64),
}
