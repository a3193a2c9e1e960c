use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{RateMatrix, TransitionKernel};

/// Terms of the `log(I + A)` series once `‖A‖₁ <= 0.25`.
pub const LOG_SERIES_ORDER: usize = 30;
const MAX_SQUARE_ROOTS: usize = 60;
const MAX_DB_ITERATIONS: usize = 100;
const ROUND_TRIP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum Embeddability {
    Embeddable { generator: RateMatrix, round_trip_error: f64 },
    NotEmbeddable { reason: String },
    Indeterminate { diagnostics: String },
}

impl Embeddability {
    pub fn is_embeddable(&self) -> bool {
        matches!(self, Embeddability::Embeddable { .. })
    }
}

/// Decides whether `kernel = exp(Q)` for a valid generator `Q`, using the
/// principal logarithm. Off-diagonal entries of the logarithm in
/// `[-tolerance, 0)` are clipped to zero before the round-trip check.
pub fn check_embeddability(kernel: &TransitionKernel, tolerance: f64) -> Embeddability {
    let s = kernel.states();
    let m = kernel.matrix();
    let p = DMatrix::from_fn(s, s, |i, j| m[i][j]);
    if s == 2 {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det <= 0.0 {
            return Embeddability::NotEmbeddable { reason: format!("determinant {det} is not positive") };
        }
    }
    let log = match matrix_log(&p) {
        Ok(l) => l,
        Err(LogError::NegativeSpectrum(ev)) => {
            return Embeddability::NotEmbeddable {
                reason: format!("eigenvalue {ev} on the closed negative real axis; no real principal logarithm"),
            }
        }
        Err(LogError::NoConvergence(d)) => return Embeddability::Indeterminate { diagnostics: d },
    };

    let mut q = vec![vec![0.0; s]; s];
    for i in 0..s {
        for j in 0..s {
            if i == j {
                continue;
            }
            let v = log[(i, j)];
            if v < -tolerance {
                return Embeddability::NotEmbeddable {
                    reason: format!("logarithm has off-diagonal entry ({i}, {j}) = {v:.6e} below -{tolerance:e}"),
                };
            }
            q[i][j] = v.max(0.0);
        }
    }
    let generator = match RateMatrix::from_off_diagonal(q) {
        Ok(g) => g,
        Err(e) => return Embeddability::Indeterminate { diagnostics: e.to_string() },
    };
    let g = generator.rates();
    let back = DMatrix::from_fn(s, s, |i, j| g[i][j]).exp();
    let round_trip_error = (&back - &p).abs().max();
    if !(round_trip_error <= ROUND_TRIP_TOL) {
        return Embeddability::NotEmbeddable {
            reason: format!("exp(generator) differs from the kernel by {round_trip_error:.3e}"),
        };
    }
    Embeddability::Embeddable { generator, round_trip_error }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LogError {
    #[error("eigenvalue {0} on the closed negative real axis")]
    NegativeSpectrum(String),
    #[error("{0}")]
    NoConvergence(String),
}

/// Principal matrix logarithm by inverse scaling and squaring: repeated
/// Denman–Beavers square roots until `‖X - I‖₁ <= 0.25`, then a fixed-order
/// Mercator series, scaled back by `2^k`.
pub fn matrix_log(p: &DMatrix<f64>) -> Result<DMatrix<f64>, LogError> {
    let n = p.nrows();
    let scale = p.abs().max().max(1e-300);
    for ev in p.complex_eigenvalues().iter() {
        if ev.re <= 1e-12 * scale && ev.im.abs() <= 1e-12 * scale {
            return Err(LogError::NegativeSpectrum(format!("{:.3e}{:+.3e}i", ev.re, ev.im)));
        }
    }
    let eye = DMatrix::<f64>::identity(n, n);
    let mut x = p.clone();
    let mut k = 0;
    while norm1(&(&x - &eye)) > 0.25 {
        if k == MAX_SQUARE_ROOTS {
            return Err(LogError::NoConvergence(format!("‖X - I‖₁ still {:.3e} after {k} square roots", norm1(&(&x - &eye)))));
        }
        x = sqrtm(&x).ok_or_else(|| LogError::NoConvergence(format!("square-root iteration {k} did not converge")))?;
        k += 1;
    }
    let a = &x - &eye;
    let mut term = a.clone();
    let mut sum = a.clone();
    for m in 2..=LOG_SERIES_ORDER {
        term = &term * &a;
        let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
        sum += &term * (sign / m as f64);
    }
    Ok(sum * 2f64.powi(k as i32))
}

/// Principal square root by the Denman–Beavers iteration.
fn sqrtm(x: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = x.nrows();
    let mut y = x.clone();
    let mut z = DMatrix::<f64>::identity(n, n);
    for _ in 0..MAX_DB_ITERATIONS {
        let y_inv = y.clone().try_inverse()?;
        let z_inv = z.clone().try_inverse()?;
        let y_next = (&y + z_inv) * 0.5;
        let z_next = (&z + y_inv) * 0.5;
        let delta = norm1(&(&y_next - &y)) / norm1(&y_next).max(1e-300);
        y = y_next;
        z = z_next;
        if delta < 1e-15 {
            return Some(y);
        }
    }
    (norm1(&(&y * &y - x)) < 1e-10 * norm1(x)).then_some(y)
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernel(m: Vec<Vec<f64>>) -> TransitionKernel {
        TransitionKernel::new(m).unwrap()
    }

    #[test]
    fn bit_flip_is_not_embeddable() {
        let v = check_embeddability(&kernel(vec![vec![0.0, 1.0], vec![1.0, 0.0]]), 1e-9);
        assert!(matches!(v, Embeddability::NotEmbeddable { .. }));
    }

    #[test]
    fn identity_has_zero_generator() {
        match check_embeddability(&TransitionKernel::identity(3), 1e-9) {
            Embeddability::Embeddable { generator, .. } => assert_eq!(generator, RateMatrix::zero(3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn two_state_closed_form() {
        let (a, b) = (0.1, 0.2);
        match check_embeddability(&kernel(vec![vec![1.0 - a, a], vec![b, 1.0 - b]]), 1e-9) {
            Embeddability::Embeddable { generator, round_trip_error } => {
                let c = -(1.0 - a - b).ln() / (a + b);
                let g = generator.rates();
                assert!((g[0][1] - c * a).abs() < 1e-10);
                assert!((g[1][0] - c * b).abs() < 1e-10);
                assert!(round_trip_error < 1e-10);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn three_state_cycle_is_not_embeddable() {
        // a pure rotation has eigenvalues on the unit circle away from 1
        let v = check_embeddability(&kernel(vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]]), 1e-9);
        assert!(!v.is_embeddable());
    }

    #[test]
    fn log_of_exp_round_trips() {
        let q = DMatrix::from_row_slice(3, 3, &[-0.5, 0.3, 0.2, 0.1, -0.4, 0.3, 0.25, 0.25, -0.5]);
        let l = matrix_log(&q.clone().exp()).unwrap();
        assert!((l - q).abs().max() < 1e-10);
    }
}
