use nalgebra::{DMatrix, DVector};

use super::{MarkovError, TransitionKernel};

/// Whether every state reaches every other through positive-probability moves.
pub fn is_irreducible(matrix: &[Vec<f64>]) -> bool {
    let s = matrix.len();
    let reach = |forward: bool| {
        let mut seen = vec![false; s];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..s {
                let w = if forward { matrix[i][j] } else { matrix[j][i] };
                if w > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|x| x)
    };
    s > 0 && reach(true) && reach(false)
}

/// The unique π with π·P = π, for an irreducible kernel.
pub fn stationary_distribution(kernel: &TransitionKernel) -> Result<Vec<f64>, MarkovError> {
    let p = kernel.matrix();
    if !is_irreducible(p) {
        return Err(MarkovError::NoUniqueStationary);
    }
    let s = p.len();
    // (Pᵀ - I)π = 0 with the last balance equation swapped for Σπ = 1
    let mut a = DMatrix::from_fn(s, s, |i, j| p[j][i] - f64::from(u8::from(i == j)));
    let mut b = DVector::zeros(s);
    a.row_mut(s - 1).fill(1.0);
    b[s - 1] = 1.0;
    let lu = a.clone().lu();
    let mut pi = lu.solve(&b).ok_or(MarkovError::NoUniqueStationary)?;
    // one step of iterative refinement
    if let Some(d) = lu.solve(&(&b - &a * &pi)) {
        pi += d;
    }
    let mut pi: Vec<f64> = pi.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= total);
    Ok(pi)
}
