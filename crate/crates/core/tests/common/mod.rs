#![allow(dead_code)]

use chronoflow::demography::{DemographicHmm, LeslieModel, Observation, Z0Policy};
use chronoflow::rng;
use rand::Rng as _;

pub fn data(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn stochastic_columns(n: usize, r: &mut rng::Rng) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for j in 0..n {
        let e: Vec<f64> = (0..n).map(|_| 0.05 + r.random::<f64>()).collect();
        let s: f64 = e.iter().sum();
        for i in 0..n {
            m[i][j] = e[i] / s;
        }
    }
    m
}

/// Small random model: 1 to 3 age classes, 1 or 2 climate states, radiocarbon
/// counts of 0 to 3 per period and up to three skeletal windows.
pub fn random_model(n: usize, t: usize, seed: u64) -> (DemographicHmm, Vec<Observation>) {
    let mut r = rng::seeded(seed);
    let classes = 1 + (seed as usize % 3);
    let regimes = (0..n)
        .map(|_| {
            let f = (0..classes).map(|_| 0.2 + r.random::<f64>()).collect();
            let p = (1..classes).map(|_| 0.3 + 0.7 * r.random::<f64>()).collect();
            LeslieModel::new(f, p).unwrap()
        })
        .collect();
    let k = 1 + (seed as usize % 2);
    let transitions = (0..k).map(|_| stochastic_columns(n, &mut r)).collect();
    let e: Vec<f64> = (0..n).map(|_| 0.1 + r.random::<f64>()).collect();
    let s: f64 = e.iter().sum();
    let initial_distribution = e.iter().map(|v| v / s).collect();
    let z0 = if seed.is_multiple_of(2) {
        Z0Policy::StableFromInitial { total: 5.0 + 20.0 * r.random::<f64>() }
    } else {
        Z0Policy::Explicit { z: (0..classes).map(|_| 1.0 + 10.0 * r.random::<f64>()).collect() }
    };
    let climate_path = (0..t).map(|_| r.random_range(0..k)).collect();
    let model = DemographicHmm { regimes, climate_states: k, transitions, climate_path, initial_distribution, z0 };
    let mut obs = Vec::new();
    for period in 0..t {
        let count = r.random_range(0..4u64);
        if count > 0 {
            obs.push(Observation::Radiocarbon { period, count });
        }
    }
    for _ in 0..r.random_range(0..4) {
        obs.push(Observation::Skeletal {
            period: r.random_range(0..t),
            age_class: r.random_range(0..classes),
            window_radius: r.random_range(0..3),
        });
    }
    (model, obs)
}

pub fn sawtooth(x: f64) -> f64 {
    if x < -2.5 {
        -x - 5.0
    } else if x < -0.5 {
        x
    } else {
        -x - 1.0
    }
}

/// `n` uniform x in `(-4, 1)` with `sawtooth(x) + N(0, sigma)`.
pub fn sawtooth_points(n: usize, sigma: f64, seed: u64) -> Vec<(f64, f64)> {
    let mut r = rng::seeded(seed);
    (0..n)
        .map(|_| {
            let x = r.random_range(-4.0..1.0);
            let e: f64 = r.sample(rand_distr::StandardNormal);
            (x, sawtooth(x) + sigma * e)
        })
        .collect()
}

/// Config file stem and command of every shipped CLI config.
pub const CONFIGS: [(&str, chronoflow::cli::Command); 16] = {
    use chronoflow::cli::Command::*;
    [
        ("pca", Pca),
        ("markov_estimate", MarkovEstimate),
        ("markov_simulate", MarkovSimulate),
        ("markov_embed", MarkovEmbed),
        ("markov_order", MarkovOrder),
        ("markov_master", MarkovMaster),
        ("sde_fit", SdeFit),
        ("sde_sample", SdeSample),
        ("sde_cycles", SdeCycles),
        ("sde_helmholtz", SdeHelmholtz),
        ("sde_plot", SdePlot),
        ("nullmodel", Nullmodel),
        ("hinge", Hinge),
        ("demography_simulate", DemographySimulate),
        ("demography_loglik", DemographyLoglik),
        ("demography_fit", DemographyFit),
    ]
};
