use serde::{Deserialize, Serialize};

use super::{MarkovError, RateMatrix};

/// Probability vectors at successive multiples of the time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub probabilities: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.probabilities.last().expect("trajectory holds p0")
    }

    /// Stored vector closest in time to `t`.
    pub fn at(&self, t: f64) -> &[f64] {
        let i = self.times.iter().enumerate().min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs())).map_or(0, |(i, _)| i);
        &self.probabilities[i]
    }
}

/// Integrates `dp/dt = p·Q` with classical RK4, renormalising after each step.
///
/// The final step is shortened if `t_final` is not a multiple of `dt`.
pub fn integrate_master_equation(rates: &RateMatrix, p0: &[f64], t_final: f64, dt: f64) -> Result<Trajectory, MarkovError> {
    let s = rates.states();
    if p0.len() != s {
        return Err(MarkovError::NotADistribution(format!("length {} for {} states", p0.len(), s)));
    }
    if p0.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(MarkovError::NotADistribution("negative or non-finite entry".into()));
    }
    let total: f64 = p0.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(MarkovError::NotADistribution(format!("sums to {total}")));
    }
    if !(t_final > 0.0 && dt > 0.0) || !t_final.is_finite() || !dt.is_finite() {
        return Err(MarkovError::InvalidTime);
    }
    let product = dt * rates.max_abs_rate();
    if product >= 0.1 {
        return Err(MarkovError::UnstableStep { dt, product });
    }

    let q = rates.rates();
    let deriv = |p: &[f64], out: &mut [f64]| {
        for j in 0..s {
            out[j] = (0..s).map(|i| p[i] * q[i][j]).sum();
        }
    };
    let n_steps = ((t_final / dt) - 1e-9).ceil().max(1.0) as usize;
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut probabilities = Vec::with_capacity(n_steps + 1);
    let mut p = p0.to_vec();
    times.push(0.0);
    probabilities.push(p.clone());
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![0.0; s], vec![0.0; s], vec![0.0; s], vec![0.0; s], vec![0.0; s]);
    for step in 1..=n_steps {
        let t = (step as f64 * dt).min(t_final);
        let h = t - times[step - 1];
        deriv(&p, &mut k1);
        for i in 0..s {
            tmp[i] = p[i] + 0.5 * h * k1[i];
        }
        deriv(&tmp, &mut k2);
        for i in 0..s {
            tmp[i] = p[i] + 0.5 * h * k2[i];
        }
        deriv(&tmp, &mut k3);
        for i in 0..s {
            tmp[i] = p[i] + h * k3[i];
        }
        deriv(&tmp, &mut k4);
        for i in 0..s {
            p[i] = (p[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).max(0.0);
        }
        let sum: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= sum);
        times.push(if step == n_steps { t_final } else { t });
        probabilities.push(p.clone());
    }
    Ok(Trajectory { times, probabilities })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symmetric() -> RateMatrix {
        RateMatrix::new(vec![vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap()
    }

    #[test]
    fn two_state_closed_form() {
        let tr = integrate_master_equation(&symmetric(), &[1.0, 0.0], 0.5, 0.01).unwrap();
        let e = (-1.0_f64).exp();
        assert!((tr.last()[0] - 0.5 * (1.0 + e)).abs() < 1e-9);
        let tr = integrate_master_equation(&symmetric(), &[1.0, 0.0], 10.0, 0.01).unwrap();
        assert!((tr.last()[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn zero_rates_freeze() {
        let tr = integrate_master_equation(&RateMatrix::zero(3), &[0.2, 0.3, 0.5], 1.0, 0.1).unwrap();
        assert!(tr.probabilities.iter().all(|p| p == &vec![0.2, 0.3, 0.5]));
    }

    #[test]
    fn uneven_final_step_lands_on_t_final() {
        let tr = integrate_master_equation(&symmetric(), &[1.0, 0.0], 0.25, 0.08).unwrap();
        assert_eq!(tr.times.last(), Some(&0.25));
        assert_eq!(tr.times.len(), 5);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(integrate_master_equation(&symmetric(), &[0.7, 0.7], 1.0, 0.01), Err(MarkovError::NotADistribution(_))));
        assert!(matches!(integrate_master_equation(&symmetric(), &[1.0, 0.0], 1.0, 0.2), Err(MarkovError::UnstableStep { .. })));
    }
}
