use super::MaskedMatrix;
use crate::error::{invalid, Result};
use crate::linalg;
use crate::netcore::ScoreMatrix;
use crate::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McParams {
    /// Nuclear-norm weight; `None` means `√N`.
    pub lambda: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for McParams {
    fn default() -> Self {
        Self {
            lambda: None,
            tol: 1e-4,
            max_iter: 200,
        }
    }
}

/// Result of [`mc_nuclear_estimate`].
#[derive(Debug, Clone)]
pub struct McFit {
    pub scores: ScoreMatrix,
    /// `false` when `max_iter` ran out before the iterate settled.
    pub converged: bool,
    pub iterations: usize,
    /// Objective after each iteration.
    pub objective: Vec<f64>,
}

/// `λ‖X‖_* + ½‖Ω(X − A)‖_F²` for symmetric `x`.
pub fn nuclear_objective(m: &MaskedMatrix, x: &Matrix, lambda: f64) -> Result<f64> {
    let nuclear: f64 = linalg::symmetric_eigenvalues(x)?.iter().map(|l| l.abs()).sum();
    Ok(lambda * nuclear + 0.5 * masked_residual(m, x))
}

fn masked_residual(m: &MaskedMatrix, x: &Matrix) -> f64 {
    let n = m.n_nodes();
    let mut total = 0.0;
    for j in 0..n {
        for i in 0..n {
            if m.is_observed(i, j) {
                total += (x[(i, j)] - m.entries()[(i, j)]).powi(2);
            }
        }
    }
    total
}

/// Nuclear-norm regularized completion by soft-impute: each step fills the
/// unobserved entries from the current iterate and soft-thresholds the
/// singular values by `λ`. Stops when the relative change of the iterate
/// drops below `tol`.
pub fn mc_nuclear_estimate(m: &MaskedMatrix, params: &McParams) -> Result<McFit> {
    let n = m.n_nodes();
    let lambda = params.lambda.unwrap_or((n as f64).sqrt());
    if !(lambda > 0.0) || !(params.tol > 0.0) {
        return Err(invalid("lambda and tol must be positive"));
    }
    if params.max_iter == 0 {
        return Err(invalid("max_iter must be at least 1"));
    }

    let mut z = Matrix::zeros(n, n);
    let mut best = (f64::INFINITY, z.clone());
    let mut objective = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < params.max_iter {
        iterations += 1;
        let filled = Matrix::from_fn(n, n, |i, j| {
            if m.is_observed(i, j) {
                m.entries()[(i, j)]
            } else {
                z[(i, j)]
            }
        });
        let (next, nuclear) = soft_threshold(&filled, lambda)?;
        let obj = lambda * nuclear + 0.5 * masked_residual(m, &next);
        objective.push(obj);

        let step = (&next - &z).norm();
        let scale = z.norm();
        z = next;
        if obj < best.0 {
            best = (obj, z.clone());
        }
        if step == 0.0 || (scale > 0.0 && step / scale < params.tol) {
            converged = true;
            break;
        }
    }
    Ok(McFit {
        scores: ScoreMatrix::new(best.1)?,
        converged,
        iterations,
        objective,
    })
}

/// Singular-value soft-thresholding of a symmetric matrix; also returns the
/// nuclear norm of the result.
fn soft_threshold(y: &Matrix, lambda: f64) -> Result<(Matrix, f64)> {
    let (values, vectors) = linalg::symmetric_eigen(y)?;
    let n = y.nrows();
    let kept: Vec<(usize, f64)> = values
        .iter()
        .enumerate()
        .filter_map(|(k, &l)| {
            let shrunk = l.abs() - lambda;
            (shrunk > 0.0).then(|| (k, shrunk.copysign(l)))
        })
        .collect();
    let mut scaled = Matrix::zeros(n, kept.len());
    let mut q = Matrix::zeros(n, kept.len());
    let mut nuclear = 0.0;
    for (c, &(k, s)) in kept.iter().enumerate() {
        scaled.set_column(c, &(vectors.column(k) * s));
        q.set_column(c, &vectors.column(k));
        nuclear += s.abs();
    }
    Ok((linalg::symmetrize(&(scaled * q.transpose())), nuclear))
}
