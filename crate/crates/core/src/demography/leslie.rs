use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::DemographyError;

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 1_000_000;

/// Female age-structured dynamics: fertilities for classes `0..=J` and
/// survivals from class `j` to `j + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeslieModel {
    pub fertility: Vec<f64>,
    pub survival: Vec<f64>,
    /// Years per age class.
    #[serde(default = "one")]
    pub age_spacing: f64,
}

fn one() -> f64 {
    1.0
}

impl LeslieModel {
    pub fn new(fertility: Vec<f64>, survival: Vec<f64>) -> Result<Self, DemographyError> {
        let m = LeslieModel { fertility, survival, age_spacing: 1.0 };
        m.validate()?;
        Ok(m)
    }

    pub fn classes(&self) -> usize {
        self.fertility.len()
    }

    pub fn validate(&self) -> Result<(), DemographyError> {
        if self.fertility.is_empty() || self.survival.len() + 1 != self.fertility.len() {
            return Err(DemographyError::LengthMismatch { fertility: self.fertility.len(), survival: self.survival.len() });
        }
        if let Some(&f) = self.fertility.iter().find(|f| !(**f >= 0.0) || !f.is_finite()) {
            return Err(DemographyError::InvalidRate(format!("fertility {f} must be finite and non-negative")));
        }
        if let Some(&p) = self.survival.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(DemographyError::InvalidRate(format!("survival {p} must lie in [0, 1]")));
        }
        if !(self.age_spacing > 0.0) || !self.age_spacing.is_finite() {
            return Err(DemographyError::InvalidRate(format!("age spacing {} must be positive", self.age_spacing)));
        }
        Ok(())
    }

    /// `z -> A z` without forming the matrix.
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(z.len());
        out.push(self.fertility.iter().zip(z).map(|(f, v)| f * v).sum());
        out.extend(self.survival.iter().zip(z).map(|(p, v)| p * v));
        out
    }
}

/// First row the fertilities, sub-diagonal the survivals, zeros elsewhere.
pub fn leslie_matrix(model: &LeslieModel) -> Result<DMatrix<f64>, DemographyError> {
    model.validate()?;
    let n = model.classes();
    let mut a = DMatrix::zeros(n, n);
    for (j, &f) in model.fertility.iter().enumerate() {
        a[(0, j)] = f;
    }
    for (j, &p) in model.survival.iter().enumerate() {
        a[(j + 1, j)] = p;
    }
    Ok(a)
}

/// `z_{t+1} = A_t z_t`; returns `z_0, ..., z_n` for `n` models.
pub fn project_population(models_per_step: &[LeslieModel], z0: &[f64]) -> Result<Vec<Vec<f64>>, DemographyError> {
    if let Some(&v) = z0.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(DemographyError::NegativePopulation(v));
    }
    let mut out = vec![z0.to_vec()];
    for m in models_per_step {
        m.validate()?;
        if m.classes() != z0.len() {
            return Err(DemographyError::DimensionMismatch { expected: z0.len(), found: m.classes() });
        }
        let next = m.apply(out.last().expect("non-empty"));
        out.push(next);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableDemography {
    /// Growth factor per period (spectral radius).
    pub lambda: f64,
    /// Stable age distribution, summing to 1.
    pub u: Vec<f64>,
    /// Reproductive values, scaled so that `v . u = 1`.
    pub v: Vec<f64>,
    pub iterations: usize,
}

/// Some power of the non-zero pattern is strictly positive. By Wielandt's
/// bound it suffices to check the power `(n-1)^2 + 1`.
pub fn is_primitive(a: &DMatrix<f64>) -> bool {
    let n = a.nrows();
    let pattern: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)] > 0.0).collect()).collect();
    let mul = |x: &Vec<Vec<bool>>, y: &Vec<Vec<bool>>| -> Vec<Vec<bool>> {
        (0..n).map(|i| (0..n).map(|j| (0..n).any(|k| x[i][k] && y[k][j])).collect()).collect()
    };
    let mut exp = (n - 1) * (n - 1) + 1;
    let mut base = pattern;
    let mut acc: Option<Vec<Vec<bool>>> = None;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(m) => mul(&m, &base),
            });
        }
        exp >>= 1;
        if exp > 0 {
            base = mul(&base, &base);
        }
    }
    acc.expect("exponent >= 1").iter().all(|r| r.iter().all(|&b| b))
}

fn power_iteration(a: &DMatrix<f64>) -> Result<(f64, DVector<f64>, usize), DemographyError> {
    let n = a.nrows();
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    for it in 1..=POWER_MAX_ITER {
        let y = a * &x;
        let lambda = y.sum();
        if !(lambda > 0.0) {
            return Err(DemographyError::NotPrimitive);
        }
        let y = y / lambda;
        let resid = (a * &y - &y * lambda).abs().max();
        x = y;
        if resid <= POWER_TOL * lambda {
            return Ok((lambda, x, it));
        }
    }
    Err(DemographyError::NoConvergence { iterations: POWER_MAX_ITER })
}

/// Growth factor, stable age distribution and reproductive values by right
/// and left power iteration.
pub fn stable_structure(model: &LeslieModel) -> Result<StableDemography, DemographyError> {
    let a = leslie_matrix(model)?;
    if !is_primitive(&a) {
        return Err(DemographyError::NotPrimitive);
    }
    let (lambda, u, it_u) = power_iteration(&a)?;
    let (_, v, it_v) = power_iteration(&a.transpose())?;
    let v = &v / v.dot(&u);
    Ok(StableDemography { lambda, u: u.iter().copied().collect(), v: v.iter().copied().collect(), iterations: it_u.max(it_v) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let m = LeslieModel::new(vec![0.0, 1.0, 1.0], vec![0.9, 0.8]).unwrap();
        let a = leslie_matrix(&m).unwrap();
        assert_eq!(a, DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 1.0, 0.9, 0.0, 0.0, 0.0, 0.8, 0.0]));
        let single = LeslieModel::new(vec![0.8], vec![]).unwrap();
        assert_eq!(leslie_matrix(&single).unwrap(), DMatrix::from_element(1, 1, 0.8));
        assert!(LeslieModel::new(vec![1.0], vec![0.5]).is_err());
    }

    #[test]
    fn two_class_eigenstructure() {
        let m = LeslieModel::new(vec![1.0, 1.0], vec![0.5]).unwrap();
        let s = stable_structure(&m).unwrap();
        let lambda = (1.0 + 3f64.sqrt()) / 2.0;
        assert!((s.lambda - lambda).abs() < 1e-9);
        let norm = lambda + 0.5;
        assert!((s.u[0] - lambda / norm).abs() < 1e-9 && (s.u[1] - 0.5 / norm).abs() < 1e-9);
        let a = leslie_matrix(&m).unwrap();
        let (u, v) = (DVector::from_vec(s.u.clone()), DVector::from_vec(s.v.clone()));
        assert!((&a * &u - &u * s.lambda).abs().max() < 1e-9);
        assert!((a.transpose() * &v - &v * s.lambda).abs().max() < 1e-9);
        assert!((v.dot(&u) - 1.0).abs() < 1e-12);
        let z = project_population(std::slice::from_ref(&m), &s.u).unwrap();
        assert!(z[1].iter().zip(&s.u).all(|(a, b)| (a - lambda * b).abs() < 1e-9));
    }

    #[test]
    fn single_class_and_fixed_point() {
        let s = stable_structure(&LeslieModel::new(vec![1.2], vec![]).unwrap()).unwrap();
        assert!((s.lambda - 1.2).abs() < 1e-12 && s.u == vec![1.0] && (s.v[0] - 1.0).abs() < 1e-12);
        let id = LeslieModel::new(vec![1.0], vec![]).unwrap();
        let z = project_population(&vec![id; 5], &[10.0]).unwrap();
        assert!(z.iter().all(|v| v == &vec![10.0]));
    }

    #[test]
    fn periodic_is_rejected() {
        let m = LeslieModel::new(vec![0.0, 1.0], vec![1.0]).unwrap();
        assert!(matches!(stable_structure(&m), Err(DemographyError::NotPrimitive)));
        let dead = LeslieModel::new(vec![0.0], vec![]).unwrap();
        assert!(matches!(stable_structure(&dead), Err(DemographyError::NotPrimitive)));
    }
}
