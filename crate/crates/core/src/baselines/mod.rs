//! Comparison methods: CUR, universal singular value thresholding,
//! nuclear-norm matrix completion and neighborhood smoothing.

mod cur;
mod mc;
mod ns;
mod usvt;

use nalgebra::DMatrix;
use rand::Rng;

pub use cur::cur_estimate;
pub use mc::{mc_nuclear_estimate, nuclear_objective, McFit, McParams};
pub use ns::{ns_estimate, DEFAULT_NS_BANDWIDTH_MULT};
pub use usvt::{usvt_estimate, DEFAULT_USVT_THRESHOLD_MULT};

use crate::error::{invalid, Result};
use crate::netcore::{AdjacencyMatrix, EgoSample};
use crate::Matrix;

/// A matrix together with a symmetric mask `Ω` of observed entries.
/// Unobserved entries of `entries` are stored as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedMatrix {
    entries: Matrix,
    observed: DMatrix<bool>,
}

impl MaskedMatrix {
    pub fn new(entries: Matrix, observed: DMatrix<bool>) -> Result<Self> {
        let n = entries.nrows();
        if entries.shape() != (n, n) || observed.shape() != (n, n) || n == 0 {
            return Err(invalid("masked matrix must be square with a mask of the same shape"));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if observed[(i, j)] != observed[(j, i)] {
                    return Err(invalid(format!("mask is not symmetric at ({i}, {j})")));
                }
            }
        }
        let entries = entries.zip_map(&observed, |x, o| if o { x } else { 0.0 });
        Ok(Self { entries, observed })
    }

    /// Egocentric mask: `Ω_ij = 1` iff `i ∈ I` or `j ∈ I`.
    pub fn from_ego(s: &EgoSample) -> Self {
        let n = s.n_total();
        let mut entries = Matrix::zeros(n, n);
        let mut observed = DMatrix::from_element(n, n, false);
        for (k, &i) in s.indices().iter().enumerate() {
            for j in 0..n {
                let x = s.row_block()[(k, j)];
                entries[(i, j)] = x;
                entries[(j, i)] = x;
                observed[(i, j)] = true;
                observed[(j, i)] = true;
            }
        }
        Self { entries, observed }
    }

    /// Each off-diagonal pair observed independently with probability `rho`.
    pub fn iid<R: Rng + ?Sized>(a: &AdjacencyMatrix, rho: f64, rng: &mut R) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(invalid(format!("observation rate {rho} outside (0, 1]")));
        }
        let n = a.n_nodes();
        let mut entries = Matrix::zeros(n, n);
        let mut observed = DMatrix::from_element(n, n, false);
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen_bool(rho) {
                    let x = a.entries()[(i, j)];
                    entries[(i, j)] = x;
                    entries[(j, i)] = x;
                    observed[(i, j)] = true;
                    observed[(j, i)] = true;
                }
            }
        }
        Ok(Self { entries, observed })
    }

    /// Fully observed matrix.
    pub fn full(entries: Matrix) -> Result<Self> {
        let n = entries.nrows();
        Self::new(entries, DMatrix::from_element(n, n, true))
    }

    pub fn n_nodes(&self) -> usize {
        self.entries.nrows()
    }

    /// Observed entries, zero elsewhere.
    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        self.observed[(i, j)]
    }

    pub fn n_observed(&self) -> usize {
        self.observed.iter().filter(|&&o| o).count()
    }

    /// Observed fraction of all `N²` entries.
    pub fn observed_fraction(&self) -> f64 {
        self.n_observed() as f64 / (self.n_nodes() * self.n_nodes()) as f64
    }

    /// Unordered off-diagonal pairs that are not observed.
    pub fn unobserved_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n_nodes();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if !self.observed[(i, j)] {
                    out.push((i, j));
                }
            }
        }
        out
    }
}
