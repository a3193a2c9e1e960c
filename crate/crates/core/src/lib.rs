//! Stochastic-process toolkit for historical and archaeological time series.
//!
//! The crate is organised by analysis:
//!
//! * [`dataset`] ingests multi-series tables and provides PCA, sliding-window
//!   curves and log-log scaling fits.
//! * [`markov`] estimates, simulates and diagnoses discrete Markov chains and
//!   continuous-time master-equation dynamics.
//! * [`sde`] fits drift/diffusion fields to short 2-D trajectories, samples
//!   counterfactual paths, estimates return-cycle probabilities and splits a
//!   drift field into potential and stream-function parts.
//! * [`nullmodel`] builds time-homogeneous null ensembles and tests pooled
//!   values for multimodality.
//! * [`hinge`] fits continuous piecewise-linear "saw-tooth" curves and places
//!   events relative to the detected thresholds.
//! * [`demography`] projects age-structured populations and evaluates a hidden
//!   Markov regime model against radiocarbon and skeletal evidence.
//! * [`cli`] wires every pipeline to config files, seeds and output manifests.
//!
//! Every stochastic routine takes an explicit `u64` seed; results are
//! reproducible bit-for-bit, including when work is spread over threads.

pub mod cli;
pub mod dataset;
pub mod demography;
pub mod hinge;
pub mod markov;
pub mod nullmodel;
pub mod rng;
pub mod sde;
pub mod svg;
