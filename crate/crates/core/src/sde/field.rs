use serde::{Deserialize, Serialize};

use super::SdeError;

/// Regular lattice of `nx × ny` nodes spanning the closed ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), nx: usize, ny: usize) -> Result<Self, SdeError> {
        let g = GridSpec { x_min: x_range.0, x_max: x_range.1, y_min: y_range.0, y_max: y_range.1, nx, ny };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), SdeError> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite());
        if !finite || self.x_max <= self.x_min || self.y_max <= self.y_min || self.nx < 2 || self.ny < 2 {
            return Err(SdeError::InvalidGrid);
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    /// Default estimation bandwidth: twice the coarser grid spacing.
    pub fn default_bandwidth(&self) -> f64 {
        2.0 * self.dx().max(self.dy())
    }

    /// Row-major index, x fastest.
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.nx, index / self.nx)
    }

    pub fn position(&self, index: usize) -> [f64; 2] {
        let (ix, iy) = self.coords(index);
        [self.x_min + ix as f64 * self.dx(), self.y_min + iy as f64 * self.dy()]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.x_min && p[0] <= self.x_max && p[1] >= self.y_min && p[1] <= self.y_max
    }

    /// The four corner nodes of the cell holding `p` with bilinear weights.
    pub fn bilinear(&self, p: [f64; 2]) -> Option<[(usize, f64); 4]> {
        if !self.contains(p) {
            return None;
        }
        let fx = (p[0] - self.x_min) / self.dx();
        let fy = (p[1] - self.y_min) / self.dy();
        let ix = (fx.floor() as usize).min(self.nx - 2);
        let iy = (fy.floor() as usize).min(self.ny - 2);
        let (tx, ty) = (fx - ix as f64, fy - iy as f64);
        Some([
            (self.index(ix, iy), (1.0 - tx) * (1.0 - ty)),
            (self.index(ix + 1, iy), tx * (1.0 - ty)),
            (self.index(ix, iy + 1), (1.0 - tx) * ty),
            (self.index(ix + 1, iy + 1), tx * ty),
        ])
    }
}

/// Gridded drift vectors and diffusion magnitudes.
///
/// `diffusion` holds `B²`: the per-component noise variance accumulated per
/// unit time. Nodes with a zero sample count are unsupported and are never
/// used for interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftDiffusionField {
    pub grid: GridSpec,
    pub drift: Vec<[f64; 2]>,
    pub diffusion: Vec<f64>,
    pub sample_counts: Vec<usize>,
}

impl DriftDiffusionField {
    pub fn new(grid: GridSpec, drift: Vec<[f64; 2]>, diffusion: Vec<f64>, sample_counts: Vec<usize>) -> Result<Self, SdeError> {
        grid.validate()?;
        let n = grid.node_count();
        if drift.len() != n || diffusion.len() != n || sample_counts.len() != n {
            return Err(SdeError::ShapeMismatch { expected: n });
        }
        let diffusion = diffusion.into_iter().map(|d| d.max(0.0)).collect();
        Ok(DriftDiffusionField { grid, drift, diffusion, sample_counts })
    }

    /// Field sampled from closed-form drift and diffusion; every node is
    /// marked supported with a count of 1.
    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 2]) -> ([f64; 2], f64)) -> Result<Self, SdeError> {
        grid.validate()?;
        let (drift, diffusion): (Vec<_>, Vec<_>) = (0..grid.node_count()).map(|i| f(grid.position(i))).unzip();
        DriftDiffusionField::new(grid, drift, diffusion, vec![1; grid.node_count()])
    }

    pub fn is_supported(&self, node: usize) -> bool {
        self.sample_counts[node] > 0
    }

    pub fn supported_fraction(&self) -> f64 {
        self.sample_counts.iter().filter(|&&c| c > 0).count() as f64 / self.sample_counts.len() as f64
    }

    /// Bilinear drift and diffusion at `p`, or the reason it cannot be evaluated.
    pub fn interpolate(&self, p: [f64; 2]) -> Result<([f64; 2], f64), SdeError> {
        let corners = self.grid.bilinear(p).ok_or(SdeError::OutsideGrid(p[0], p[1]))?;
        let mut a = [0.0; 2];
        let mut d = 0.0;
        for (node, w) in corners {
            if w == 0.0 {
                continue;
            }
            if !self.is_supported(node) {
                return Err(SdeError::Unsupported(p[0], p[1]));
            }
            a[0] += w * self.drift[node][0];
            a[1] += w * self.drift[node][1];
            d += w * self.diffusion[node];
        }
        Ok((a, d.max(0.0)))
    }
}
