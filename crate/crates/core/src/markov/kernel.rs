use serde::{Deserialize, Serialize};

use super::MarkovError;

/// Contiguous 1-D bins `[e0, e1), [e1, e2), ..., [e_{n-1}, e_n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct StateBinning {
    edges: Vec<f64>,
}

impl StateBinning {
    pub fn new(edges: Vec<f64>) -> Result<Self, MarkovError> {
        if edges.len() < 2 || edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(MarkovError::InvalidBinning);
        }
        Ok(StateBinning { edges })
    }

    /// `bins` equal-width bins spanning `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Result<Self, MarkovError> {
        if bins == 0 || !(hi > lo) {
            return Err(MarkovError::InvalidBinning);
        }
        let w = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|i| lo + w * i as f64).collect();
        edges.push(hi);
        StateBinning::new(edges)
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn bin_count(&self) -> usize {
        self.edges.len() - 1
    }

    /// Bin holding `x`; the last bin is closed on the right.
    pub fn bin_of(&self, x: f64) -> Option<usize> {
        let last = *self.edges.last()?;
        if !(x >= self.edges[0] && x <= last) {
            return None;
        }
        if x == last {
            return Some(self.bin_count() - 1);
        }
        Some(self.edges.partition_point(|&e| e <= x) - 1)
    }

    pub fn center(&self, bin: usize) -> f64 {
        0.5 * (self.edges[bin] + self.edges[bin + 1])
    }

    pub fn bounds(&self, bin: usize) -> (f64, f64) {
        (self.edges[bin], self.edges[bin + 1])
    }
}

impl TryFrom<Vec<f64>> for StateBinning {
    type Error = MarkovError;
    fn try_from(edges: Vec<f64>) -> Result<Self, MarkovError> {
        StateBinning::new(edges)
    }
}

impl From<StateBinning> for Vec<f64> {
    fn from(b: StateBinning) -> Vec<f64> {
        b.edges
    }
}

/// Row-stochastic transition matrix; rows are source states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelRepr", into = "KernelRepr")]
pub struct TransitionKernel {
    matrix: Vec<Vec<f64>>,
    binning: Option<StateBinning>,
    time_step: f64,
}

#[derive(Serialize, Deserialize)]
struct KernelRepr {
    states: usize,
    matrix: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    binning: Option<StateBinning>,
    #[serde(default = "unit_step")]
    time_step: f64,
}

fn unit_step() -> f64 {
    1.0
}

const ROW_TOL: f64 = 1e-12;

pub(crate) fn check_square(m: &[Vec<f64>]) -> Result<usize, MarkovError> {
    let s = m.len();
    if s == 0 {
        return Err(MarkovError::Empty);
    }
    if let Some((row, r)) = m.iter().enumerate().find(|(_, r)| r.len() != s) {
        return Err(MarkovError::NotSquare { rows: s, row, cols: r.len() });
    }
    Ok(s)
}

impl TransitionKernel {
    /// Validates squareness, non-negativity and unit row sums (within 1e-12).
    /// Rows are renormalised by their sum so they hold exactly to rounding.
    pub fn new(mut matrix: Vec<Vec<f64>>) -> Result<Self, MarkovError> {
        check_square(&matrix)?;
        for (i, row) in matrix.iter_mut().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(MarkovError::InvalidEntry { row: i, col: j, value: v });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOL * row.len().max(1) as f64 {
                return Err(MarkovError::NotStochastic { row: i, sum });
            }
            row.iter_mut().for_each(|v| *v /= sum);
        }
        Ok(TransitionKernel { matrix, binning: None, time_step: 1.0 })
    }

    pub fn with_binning(mut self, binning: StateBinning) -> Result<Self, MarkovError> {
        if binning.bin_count() != self.states() {
            return Err(MarkovError::InvalidBinning);
        }
        self.binning = Some(binning);
        Ok(self)
    }

    pub fn with_time_step(mut self, dt: f64) -> Result<Self, MarkovError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(MarkovError::InvalidTime);
        }
        self.time_step = dt;
        Ok(self)
    }

    pub fn states(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i][j]
    }

    pub fn binning(&self) -> Option<&StateBinning> {
        self.binning.as_ref()
    }

    pub fn time_step(&self) -> f64 {
        self.time_step
    }

    pub fn identity(states: usize) -> Self {
        let matrix = (0..states).map(|i| (0..states).map(|j| f64::from(u8::from(i == j))).collect()).collect();
        TransitionKernel { matrix, binning: None, time_step: 1.0 }
    }
}

impl TryFrom<KernelRepr> for TransitionKernel {
    type Error = MarkovError;
    fn try_from(r: KernelRepr) -> Result<Self, MarkovError> {
        if r.states != r.matrix.len() {
            return Err(MarkovError::NotSquare { rows: r.matrix.len(), row: 0, cols: r.states });
        }
        let mut k = TransitionKernel::new(r.matrix)?.with_time_step(r.time_step)?;
        if let Some(b) = r.binning {
            k = k.with_binning(b)?;
        }
        Ok(k)
    }
}

impl From<TransitionKernel> for KernelRepr {
    fn from(k: TransitionKernel) -> Self {
        KernelRepr { states: k.matrix.len(), matrix: k.matrix, binning: k.binning, time_step: k.time_step }
    }
}

/// Continuous-time generator: non-negative off-diagonals, zero row sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RateRepr", into = "RateRepr")]
pub struct RateMatrix {
    rates: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RateRepr {
    states: usize,
    matrix: Vec<Vec<f64>>,
}

impl RateMatrix {
    pub fn new(rates: Vec<Vec<f64>>) -> Result<Self, MarkovError> {
        let s = check_square(&rates)?;
        let scale = rates.iter().flatten().fold(1.0_f64, |m, v| m.max(v.abs()));
        for i in 0..s {
            for j in 0..s {
                let v = rates[i][j];
                if !v.is_finite() || (i != j && v < 0.0) {
                    return Err(MarkovError::InvalidEntry { row: i, col: j, value: v });
                }
            }
            let sum: f64 = rates[i].iter().sum();
            if sum.abs() > ROW_TOL * scale * s as f64 {
                return Err(MarkovError::InvalidRates(format!("row {i} sums to {sum}")));
            }
        }
        Ok(RateMatrix { rates })
    }

    /// Builds a generator from off-diagonal rates; the diagonal is ignored
    /// and replaced by minus the row's off-diagonal sum.
    pub fn from_off_diagonal(mut rates: Vec<Vec<f64>>) -> Result<Self, MarkovError> {
        let s = check_square(&rates)?;
        for i in 0..s {
            rates[i][i] = 0.0;
            rates[i][i] = -rates[i].iter().sum::<f64>();
        }
        RateMatrix::new(rates)
    }

    pub fn zero(states: usize) -> Self {
        RateMatrix { rates: vec![vec![0.0; states]; states] }
    }

    pub fn states(&self) -> usize {
        self.rates.len()
    }

    pub fn rates(&self) -> &[Vec<f64>] {
        &self.rates
    }

    pub fn max_abs_rate(&self) -> f64 {
        self.rates.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl TryFrom<RateRepr> for RateMatrix {
    type Error = MarkovError;
    fn try_from(r: RateRepr) -> Result<Self, MarkovError> {
        if r.states != r.matrix.len() {
            return Err(MarkovError::NotSquare { rows: r.matrix.len(), row: 0, cols: r.states });
        }
        RateMatrix::new(r.matrix)
    }
}

impl From<RateMatrix> for RateRepr {
    fn from(r: RateMatrix) -> Self {
        RateRepr { states: r.rates.len(), matrix: r.rates }
    }
}
