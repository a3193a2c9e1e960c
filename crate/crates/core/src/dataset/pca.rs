use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetError, Observation, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Impute {
    DropIncomplete,
    MeanFill,
}

impl std::str::FromStr for Impute {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "drop-incomplete" => Ok(Impute::DropIncomplete),
            "mean-fill" => Ok(Impute::MeanFill),
            other => Err(format!("unknown imputation `{other}` (expected drop-incomplete or mean-fill)")),
        }
    }
}

/// Which observation a score row came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowKey {
    pub series_id: String,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaResult {
    /// `components[k]` is the loading vector of component k.
    pub components: Vec<Vec<f64>>,
    pub explained_fraction: Vec<f64>,
    /// One row per retained observation, one column per component.
    pub scores: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub rows: Vec<RowKey>,
}

impl PcaResult {
    /// `scores · componentsᵀ + mean`, i.e. the imputed data matrix.
    pub fn reconstruct(&self) -> Vec<Vec<f64>> {
        self.scores
            .iter()
            .map(|s| {
                (0..self.mean.len())
                    .map(|j| self.mean[j] + s.iter().zip(&self.components).map(|(sk, c)| sk * c[j]).sum::<f64>())
                    .collect()
            })
            .collect()
    }

    /// Scores as a dataset with variables `PC1..PCk`, keyed like the input.
    pub fn scores_dataset(&self) -> Dataset {
        let names = (1..=self.components.len()).map(|k| format!("PC{k}")).collect::<Vec<_>>();
        let mut series: Vec<Series> = Vec::new();
        for (key, s) in self.rows.iter().zip(&self.scores) {
            let obs = Observation { time: key.time, values: s.iter().copied().map(Some).collect() };
            match series.iter_mut().find(|x| x.id == key.series_id) {
                Some(x) => x.observations.push(obs),
                None => series.push(Series { id: key.series_id.clone(), observations: vec![obs] }),
            }
        }
        Dataset::new(names, series).expect("scores inherit a valid layout")
    }
}

/// Principal components of the dataset's variables.
///
/// Components are ordered by explained variance and signed so that each
/// loading vector's largest-magnitude entry is positive.
pub fn run_pca(dataset: &Dataset, impute: Impute) -> Result<PcaResult, DatasetError> {
    let p = dataset.variable_count;
    let col_means: Vec<Option<f64>> = (0..p)
        .map(|j| {
            let vals = dataset.pooled(j);
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect();

    let mut rows = Vec::new();
    let mut data: Vec<Vec<f64>> = Vec::new();
    for s in &dataset.series {
        for o in &s.observations {
            let row: Option<Vec<f64>> = match impute {
                Impute::DropIncomplete => o.values.iter().copied().collect(),
                Impute::MeanFill => o.values.iter().enumerate().map(|(j, v)| v.or(col_means[j])).collect::<Option<Vec<f64>>>(),
            };
            match row {
                Some(r) => {
                    data.push(r);
                    rows.push(RowKey { series_id: s.id.clone(), time: o.time });
                }
                None if impute == Impute::MeanFill => {
                    let j = col_means.iter().position(Option::is_none).unwrap_or(0);
                    return Err(DatasetError::EmptyVariable(dataset.variable_names[j].clone()));
                }
                None => {}
            }
        }
    }
    let n = data.len();
    if n < 2 {
        return Err(DatasetError::TooFewObservations { needed: 2, found: n });
    }
    let mean: Vec<f64> = (0..p).map(|j| data.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let centered = DMatrix::from_fn(n, p, |i, j| data[i][j] - mean[j]);
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    let total: f64 = cov.trace();
    if !(total > 0.0) {
        return Err(DatasetError::ZeroVariance);
    }

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut components = Vec::with_capacity(p);
    let mut explained_fraction = Vec::with_capacity(p);
    for &k in &order {
        let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        let max_abs = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        // first entry within rounding of the maximum decides, so ties are stable
        let lead = v.iter().position(|x| x.abs() >= max_abs * (1.0 - 1e-9)).unwrap_or(0);
        if v[lead] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(v);
        explained_fraction.push((eig.eigenvalues[k].max(0.0) / total).min(1.0));
    }

    let scores = (0..n).map(|i| components.iter().map(|c| (0..p).map(|j| centered[(i, j)] * c[j]).sum()).collect()).collect();

    Ok(PcaResult { components, explained_fraction, scores, mean, rows })
}
