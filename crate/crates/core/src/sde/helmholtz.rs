use serde::{Deserialize, Serialize};

use super::{DriftDiffusionField, GridSpec, SdeError};

/// Relative residual at which a single-potential fit is accepted.
const SINGLE_POTENTIAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionMode {
    /// Exact split with the scalar potential zero on the boundary, so any
    /// harmonic component is carried by the stream function.
    BoundaryPinned,
    /// Exact pure gradient; the stream function is zero.
    Gradient,
    /// Neither exact split exists; plain least squares over both potentials.
    LeastSquares,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HelmholtzDecomposition {
    pub grid: GridSpec,
    pub scalar_potential: Vec<f64>,
    pub stream_function: Vec<f64>,
    /// `‖F - (-∇φ + ∇⊥ψ)‖₂` over all nodes.
    pub residual_norm: f64,
    /// `‖F‖₂` over all nodes, the zero-potential baseline.
    pub field_norm: f64,
    pub mode: DecompositionMode,
    /// Unsupported nodes whose drift was copied from the nearest supported node.
    pub filled_nodes: Vec<usize>,
    pub iterations: usize,
}

impl HelmholtzDecomposition {
    /// `-∇φ + ∇⊥ψ` with `∇⊥ψ = (∂ψ/∂y, -∂ψ/∂x)`, using the solver's stencils.
    pub fn reconstruct(&self) -> Vec<[f64; 2]> {
        let g = &self.grid;
        let dphi = gradient(g, &self.scalar_potential);
        let dpsi = gradient(g, &self.stream_function);
        (0..g.node_count()).map(|n| [-dphi[n][0] + dpsi[n][1], -dphi[n][1] - dpsi[n][0]]).collect()
    }
}

/// Splits the drift into `-∇φ + ∇⊥ψ`.
///
/// Derivatives are central in the interior and second-order one-sided on the
/// edges, and the misfit is measured at every node. On a bounded grid a
/// harmonic `h` can move between the parts (`∇h` is also `∇⊥` of its
/// conjugate), so a gauge is needed. The split with `φ = 0` on the boundary is
/// tried first, then a pure gradient; each is accepted when it reproduces the
/// field to relative residual 1e-8. Failing both, both potentials are fitted by
/// least squares. Potentials are returned with zero mean.
pub fn helmholtz_decompose(field: &DriftDiffusionField) -> Result<HelmholtzDecomposition, SdeError> {
    let g = field.grid;
    if g.nx < 3 || g.ny < 3 {
        return Err(SdeError::GridTooSmall { nx: g.nx, ny: g.ny });
    }
    let (drift, filled_nodes) = fill_unsupported(field)?;
    let n = g.node_count();
    let b: Vec<f64> = drift.iter().flat_map(|d| [d[0], d[1]]).collect();
    let field_norm = norm(&b);

    let all: Vec<Option<usize>> = (0..n).map(Some).collect();
    let none: Vec<Option<usize>> = vec![None; n];
    let mut interior = vec![None; n];
    let mut k = 0;
    for (i, slot) in interior.iter_mut().enumerate() {
        let (ix, iy) = g.coords(i);
        if ix > 0 && iy > 0 && ix + 1 < g.nx && iy + 1 < g.ny {
            *slot = Some(k);
            k += 1;
        }
    }

    let attempts = [
        (DecompositionMode::BoundaryPinned, &interior, &all, true),
        (DecompositionMode::Gradient, &all, &none, true),
        (DecompositionMode::LeastSquares, &all, &all, false),
    ];
    let mut last = None;
    for (mode, phi_cols, psi_cols, needs_fit) in attempts {
        let op = Operator::new(&g, phi_cols, psi_cols);
        let (x, iterations) = cgls(&op, &b);
        let (mut phi, mut psi) = op.split(&x);
        remove_mean(&mut phi);
        remove_mean(&mut psi);
        let mut dec = HelmholtzDecomposition {
            grid: g,
            scalar_potential: phi,
            stream_function: psi,
            residual_norm: 0.0,
            field_norm,
            mode,
            filled_nodes: filled_nodes.clone(),
            iterations,
        };
        let recon = dec.reconstruct();
        let r: Vec<f64> = recon.iter().zip(&drift).flat_map(|(a, f)| [f[0] - a[0], f[1] - a[1]]).collect();
        dec.residual_norm = norm(&r);
        if !needs_fit || dec.residual_norm <= SINGLE_POTENTIAL_TOL * field_norm {
            return Ok(dec);
        }
        last = Some(dec);
    }
    Ok(last.expect("least-squares attempt always returns"))
}

fn fill_unsupported(field: &DriftDiffusionField) -> Result<(Vec<[f64; 2]>, Vec<usize>), SdeError> {
    let g = &field.grid;
    let supported: Vec<usize> = (0..g.node_count()).filter(|&i| field.is_supported(i)).collect();
    if supported.is_empty() {
        return Err(SdeError::NoSupport);
    }
    let mut drift = field.drift.clone();
    let mut filled = Vec::new();
    for i in 0..g.node_count() {
        if field.is_supported(i) {
            continue;
        }
        let p = g.position(i);
        let nearest = supported
            .iter()
            .copied()
            .min_by(|&a, &b| {
                let (pa, pb) = (g.position(a), g.position(b));
                let da = (pa[0] - p[0]).powi(2) + (pa[1] - p[1]).powi(2);
                let db = (pb[0] - p[0]).powi(2) + (pb[1] - p[1]).powi(2);
                da.total_cmp(&db)
            })
            .expect("non-empty");
        drift[i] = field.drift[nearest];
        filled.push(i);
    }
    Ok((drift, filled))
}

/// Coefficients of the derivative along one axis at position `i` of `n`.
fn stencil(i: usize, n: usize, h: f64) -> [(usize, f64); 3] {
    let c = 0.5 / h;
    if i == 0 {
        [(0, -3.0 * c), (1, 4.0 * c), (2, -c)]
    } else if i == n - 1 {
        [(n - 1, 3.0 * c), (n - 2, -4.0 * c), (n - 3, c)]
    } else {
        [(i - 1, -c), (i + 1, c), (i, 0.0)]
    }
}

fn gradient(g: &GridSpec, f: &[f64]) -> Vec<[f64; 2]> {
    (0..g.node_count())
        .map(|node| {
            let (ix, iy) = g.coords(node);
            let gx = stencil(ix, g.nx, g.dx()).iter().map(|&(j, c)| c * f[g.index(j, iy)]).sum();
            let gy = stencil(iy, g.ny, g.dy()).iter().map(|&(j, c)| c * f[g.index(ix, j)]).sum();
            [gx, gy]
        })
        .collect()
}

/// Sparse map from potential unknowns to the stacked `(Fx, Fy)` node values.
struct Operator {
    /// (row, column, value)
    entries: Vec<(usize, usize, f64)>,
    rows: usize,
    cols: usize,
    phi_cols: Vec<Option<usize>>,
    psi_cols: Vec<Option<usize>>,
}

impl Operator {
    fn new(g: &GridSpec, phi: &[Option<usize>], psi: &[Option<usize>]) -> Self {
        let n_phi = phi.iter().flatten().count();
        let psi_cols: Vec<Option<usize>> = psi.iter().map(|c| c.map(|c| c + n_phi)).collect();
        let n_psi = psi.iter().flatten().count();
        let mut entries = Vec::new();
        for node in 0..g.node_count() {
            let (ix, iy) = g.coords(node);
            for &(j, c) in &stencil(ix, g.nx, g.dx()) {
                let m = g.index(j, iy);
                // Fx gets -∂φ/∂x, Fy gets -∂ψ/∂x
                if let Some(col) = phi[m] {
                    entries.push((2 * node, col, -c));
                }
                if let Some(col) = psi_cols[m] {
                    entries.push((2 * node + 1, col, -c));
                }
            }
            for &(j, c) in &stencil(iy, g.ny, g.dy()) {
                let m = g.index(ix, j);
                // Fy gets -∂φ/∂y, Fx gets +∂ψ/∂y
                if let Some(col) = phi[m] {
                    entries.push((2 * node + 1, col, -c));
                }
                if let Some(col) = psi_cols[m] {
                    entries.push((2 * node, col, c));
                }
            }
        }
        entries.retain(|e| e.2 != 0.0);
        Operator { entries, rows: 2 * g.node_count(), cols: n_phi + n_psi, phi_cols: phi.to_vec(), psi_cols }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for &(r, c, v) in &self.entries {
            out[r] += v * x[c];
        }
    }

    fn apply_t(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for &(r, c, v) in &self.entries {
            out[c] += v * y[r];
        }
    }

    fn split(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let take = |cols: &[Option<usize>]| cols.iter().map(|c| c.map_or(0.0, |c| x[c])).collect();
        (take(&self.phi_cols), take(&self.psi_cols))
    }
}

/// Conjugate gradients on the normal equations, started from zero so the
/// result has no component in the operator's null space.
fn cgls(op: &Operator, b: &[f64]) -> (Vec<f64>, usize) {
    let mut x = vec![0.0; op.cols];
    if op.cols == 0 {
        return (x, 0);
    }
    let mut r = b.to_vec();
    let mut s = vec![0.0; op.cols];
    op.apply_t(&r, &mut s);
    let s0 = norm(&s);
    if s0 == 0.0 {
        return (x, 0);
    }
    let mut p = s.clone();
    let mut gamma = dot(&s, &s);
    let mut q = vec![0.0; op.rows];
    let max_iter = 20 * op.cols;
    for it in 1..=max_iter {
        op.apply(&p, &mut q);
        let qq = dot(&q, &q);
        if qq == 0.0 {
            return (x, it);
        }
        let alpha = gamma / qq;
        for i in 0..x.len() {
            x[i] += alpha * p[i];
        }
        for i in 0..r.len() {
            r[i] -= alpha * q[i];
        }
        op.apply_t(&r, &mut s);
        let gamma_new = dot(&s, &s);
        if gamma_new.sqrt() <= 1e-14 * s0 {
            return (x, it);
        }
        let beta = gamma_new / gamma;
        gamma = gamma_new;
        for i in 0..p.len() {
            p[i] = s[i] + beta * p[i];
        }
    }
    (x, max_iter)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn remove_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len().max(1) as f64;
    v.iter_mut().for_each(|x| *x -= m);
}
