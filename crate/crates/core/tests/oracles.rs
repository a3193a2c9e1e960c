//! Results checked against an independent route: reference implementations,
//! closed forms, exhaustive enumeration or shipped fixtures.

mod common;

use chronoflow::demography::{brute_force_log_likelihood, forward_log_likelihood, leslie_matrix, stable_structure, LeslieModel};
use chronoflow::markov::{
    check_embeddability, integrate_master_equation, stationary_distribution, Embeddability, RateMatrix, TransitionKernel,
};
use chronoflow::nullmodel::{dip_statistic, reference_config, NullModelConfig};
use chronoflow::rng;
use nalgebra::DMatrix;
use rand::Rng as _;
use serde::Deserialize;

#[derive(Deserialize)]
struct DipCase {
    values: Vec<f64>,
    dip: f64,
}

#[derive(Deserialize)]
struct DipOracle {
    cases: Vec<DipCase>,
}

#[test]
fn dip_matches_reference_implementation() {
    let text = std::fs::read_to_string(common::data("dip_oracle.json")).unwrap();
    let oracle: DipOracle = serde_json::from_str(&text).unwrap();
    assert!(oracle.cases.len() >= 10);
    for (i, case) in oracle.cases.iter().enumerate() {
        let mut v = case.values.clone();
        v.sort_by(f64::total_cmp);
        let d = dip_statistic(&v);
        assert!((d - case.dip).abs() < 1e-12, "case {i}: {d} vs {}", case.dip);
    }
}

#[test]
fn shipped_reference_config_is_the_builtin_one() {
    let text = std::fs::read_to_string(common::data("reference_nullmodel.json")).unwrap();
    let shipped: NullModelConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(shipped, reference_config());
}

#[test]
fn forward_matches_enumeration_with_four_regimes() {
    for seed in 0..6 {
        let (m, obs) = common::random_model(4, 6, 9000 + seed);
        let f = forward_log_likelihood(&m, &obs).unwrap();
        let b = brute_force_log_likelihood(&m, &obs).unwrap();
        assert!((f - b).abs() < 1e-10, "seed {seed}: {f} vs {b}");
    }
}

fn random_generator(s: usize, scale: f64, r: &mut rng::Rng) -> Vec<Vec<f64>> {
    let mut q = vec![vec![0.0; s]; s];
    for i in 0..s {
        for j in 0..s {
            if i != j {
                q[i][j] = scale * r.random::<f64>();
            }
        }
        q[i][i] = -q[i].iter().sum::<f64>();
    }
    q
}

fn to_matrix(m: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(m.len(), m.len(), |i, j| m[i][j])
}

#[test]
fn master_equation_matches_matrix_exponential() {
    let mut r = rng::seeded(5);
    for _ in 0..5 {
        let q = random_generator(3, 1.0, &mut r);
        let p0 = [0.2, 0.5, 0.3];
        let traj = integrate_master_equation(&RateMatrix::new(q.clone()).unwrap(), &p0, 2.0, 0.01).unwrap();
        let e = (to_matrix(&q) * 2.0).exp();
        for j in 0..3 {
            let want: f64 = (0..3).map(|i| p0[i] * e[(i, j)]).sum();
            assert!((traj.last()[j] - want).abs() < 1e-8, "{} vs {want}", traj.last()[j]);
        }
    }
}

#[test]
fn logarithm_recovers_generator_of_its_exponential() {
    let mut r = rng::seeded(6);
    for s in 2..=4 {
        let q = random_generator(s, 0.3, &mut r);
        let e = to_matrix(&q).exp();
        let p: Vec<Vec<f64>> = (0..s).map(|i| (0..s).map(|j| e[(i, j)]).collect()).collect();
        let p: Vec<Vec<f64>> = p.iter().map(|row| row.iter().map(|v| v / row.iter().sum::<f64>()).collect()).collect();
        match check_embeddability(&TransitionKernel::new(p).unwrap(), 1e-9) {
            Embeddability::Embeddable { generator, .. } => {
                for i in 0..s {
                    for j in 0..s {
                        assert!((generator.rates()[i][j] - q[i][j]).abs() < 1e-8);
                    }
                }
            }
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn stationary_distribution_matches_matrix_power() {
    let k = TransitionKernel::new(vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.8, 0.1], vec![0.3, 0.3, 0.4]]).unwrap();
    let pi = stationary_distribution(&k).unwrap();
    let p = to_matrix(k.matrix()).pow(200);
    for j in 0..3 {
        assert!((pi[j] - p[(0, j)]).abs() < 1e-12);
    }
}

#[test]
fn leslie_growth_rate_matches_eigenvalues() {
    let models = [
        LeslieModel::new(vec![0.0, 1.5, 0.8], vec![0.6, 0.4]).unwrap(),
        LeslieModel::new(vec![0.3, 0.9, 0.9, 0.2], vec![0.9, 0.8, 0.5]).unwrap(),
    ];
    for m in models {
        let l = leslie_matrix(&m).unwrap();
        let dominant = l.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let s = stable_structure(&m).unwrap();
        assert!((s.lambda - dominant).abs() < 1e-9, "{} vs {dominant}", s.lambda);
        let lu = &l * nalgebra::DVector::from_vec(s.u.clone());
        for (a, b) in lu.iter().zip(&s.u) {
            assert!((a - s.lambda * b).abs() < 1e-9);
        }
    }
}
