//! Graph and matrix types, egocentric sampling and the numerical-rank
//! diagnostic.
//!
//! Nodes are 0-based contiguous ids. An egocentric sample keeps the rows of
//! the adjacency matrix for the sampled nodes `I`; with the sampled nodes
//! listed first the matrix splits into
//!
//! ```text
//!     | A_11  A_12 |      A_in = [A_11 A_12]   (n × N, observed)
//!     | A_21  A_22 |      A_22                  (unobserved)
//! ```

use std::collections::HashMap;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::Matrix;

fn check_square(m: &Matrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(invalid(format!(
            "{what} must be a nonempty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn check_symmetric(m: &Matrix, what: &str) -> Result<()> {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if m[(i, j)] != m[(j, i)] {
                return Err(invalid(format!("{what} is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Symmetric binary adjacency matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    entries: Matrix,
}

impl AdjacencyMatrix {
    /// Validates a dense 0/1 matrix. Diagonal entries are dropped.
    pub fn new(mut entries: Matrix) -> Result<Self> {
        check_square(&entries, "adjacency matrix")?;
        if let Some(x) = entries.iter().find(|&&x| x != 0.0 && x != 1.0) {
            return Err(invalid(format!("adjacency entries must be 0 or 1, found {x}")));
        }
        check_symmetric(&entries, "adjacency matrix")?;
        entries.fill_diagonal(0.0);
        Ok(Self { entries })
    }

    /// Builds an undirected graph from an edge list. Self-loops are dropped;
    /// repeated and reversed edges collapse to one.
    pub fn from_edges(n_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n_nodes == 0 {
            return Err(invalid("graph needs at least one node"));
        }
        let mut entries = Matrix::zeros(n_nodes, n_nodes);
        for (i, j) in edges {
            if i >= n_nodes || j >= n_nodes {
                return Err(invalid(format!("edge ({i}, {j}) outside 0..{n_nodes}")));
            }
            if i != j {
                entries[(i, j)] = 1.0;
                entries[(j, i)] = 1.0;
            }
        }
        Ok(Self { entries })
    }

    pub(crate) fn from_trusted(entries: Matrix) -> Self {
        Self { entries }
    }

    pub fn n_nodes(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of undirected edges `m`.
    pub fn n_edges(&self) -> usize {
        (self.entries.sum() / 2.0).round() as usize
    }

    pub fn average_degree(&self) -> f64 {
        2.0 * self.n_edges() as f64 / self.n_nodes() as f64
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.entries[(i, j)] != 0.0
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    /// Undirected edges `(i, j)` with `i < j`, row-major.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n_nodes();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn numerical_rank(&self) -> Result<f64> {
        numerical_rank(self)
    }
}

/// Symmetric edge-probability matrix, entries in `[0, 1]`, zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix {
    entries: Matrix,
}

impl ProbabilityMatrix {
    pub fn new(entries: Matrix) -> Result<Self> {
        check_square(&entries, "probability matrix")?;
        if let Some(x) = entries.iter().find(|&&x| !(0.0..=1.0).contains(&x)) {
            return Err(invalid(format!("probabilities must lie in [0, 1], found {x}")));
        }
        check_symmetric(&entries, "probability matrix")?;
        if (0..entries.nrows()).any(|i| entries[(i, i)] != 0.0) {
            return Err(invalid("probability matrix must have a zero diagonal"));
        }
        Ok(Self { entries })
    }

    pub fn n_nodes(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    /// Expected average degree `(2/N) Σ_{i<j} p_ij`.
    pub fn expected_degree(&self) -> f64 {
        self.entries.sum() / self.n_nodes() as f64
    }
}

/// Symmetric matrix of predicted link scores. Scores are only ever compared,
/// so they are not constrained to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    entries: Matrix,
}

impl ScoreMatrix {
    /// Symmetrizes `(m + mᵀ)/2` on construction.
    pub fn new(m: Matrix) -> Result<Self> {
        check_square(&m, "score matrix")?;
        Ok(Self {
            entries: linalg::symmetrize(&m),
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn into_inner(self) -> Matrix {
        self.entries
    }

    /// Scores clipped to `[0, 1]`, for callers wanting probabilities.
    pub fn clamped(&self) -> ScoreMatrix {
        ScoreMatrix {
            entries: self.entries.map(|x| x.clamp(0.0, 1.0)),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScoreMatrix {
        ScoreMatrix {
            entries: self.entries.map(f),
        }
    }
}

/// Sampled node set `I` and the observed row block `A_in`.
///
/// The row block is usually binary, but real-valued rows are accepted so the
/// estimators can be fed noiseless probability rows.
#[derive(Debug, Clone, PartialEq)]
pub struct EgoSample {
    n_total: usize,
    indices: Vec<usize>,
    row_block: Matrix,
    position: Vec<Option<usize>>,
}

impl EgoSample {
    /// `row_block` row `k` holds the observed row of node `indices[k]`.
    pub fn new(n_total: usize, indices: Vec<usize>, row_block: Matrix) -> Result<Self> {
        let n = indices.len();
        if n == 0 || n > n_total {
            return Err(invalid(format!("sample size {n} outside 1..={n_total}")));
        }
        if row_block.shape() != (n, n_total) {
            return Err(invalid(format!(
                "row block is {}x{}, expected {n}x{n_total}",
                row_block.nrows(),
                row_block.ncols()
            )));
        }
        if row_block.iter().any(|x| !x.is_finite()) {
            return Err(invalid("row block has non-finite entries"));
        }
        let mut position = vec![None; n_total];
        for (k, &i) in indices.iter().enumerate() {
            if i >= n_total {
                return Err(invalid(format!("node {i} outside 0..{n_total}")));
            }
            if position[i].replace(k).is_some() {
                return Err(invalid(format!("node {i} sampled twice")));
            }
        }
        for a in 0..n {
            for b in (a + 1)..n {
                if row_block[(a, indices[b])] != row_block[(b, indices[a])] {
                    return Err(invalid(format!(
                        "observed rows disagree on pair ({}, {})",
                        indices[a], indices[b]
                    )));
                }
            }
        }
        Ok(Self {
            n_total,
            indices,
            row_block,
            position,
        })
    }

    /// Copies the rows `indices` out of a full symmetric matrix.
    pub fn from_rows(full: &Matrix, indices: Vec<usize>) -> Result<Self> {
        check_square(full, "full matrix")?;
        if let Some(&bad) = indices.iter().find(|&&i| i >= full.nrows()) {
            return Err(invalid(format!("node {bad} outside 0..{}", full.nrows())));
        }
        let rows = Matrix::from_fn(indices.len(), full.ncols(), |k, j| full[(indices[k], j)]);
        Self::new(full.nrows(), indices, rows)
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn n_sampled(&self) -> usize {
        self.indices.len()
    }

    /// Sampling rate `ρ = n / N`.
    pub fn rho(&self) -> f64 {
        self.n_sampled() as f64 / self.n_total as f64
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn row_block(&self) -> &Matrix {
        &self.row_block
    }

    pub fn is_sampled(&self, node: usize) -> bool {
        self.position[node].is_some()
    }

    /// Row position of `node` within the row block, if sampled.
    pub fn position(&self, node: usize) -> Option<usize> {
        self.position[node]
    }

    /// In-sample block `A_11` (columns of `A_in` restricted to `I`, ordered by `I`).
    pub fn in_sample_block(&self) -> Matrix {
        in_sample_columns(&self.row_block, &self.indices)
    }

    /// Nodes outside `I`, ascending.
    pub fn unsampled(&self) -> Vec<usize> {
        (0..self.n_total).filter(|&i| !self.is_sampled(i)).collect()
    }

    /// The sample with the row at position `k` removed.
    pub fn without_row(&self, k: usize) -> Result<EgoSample> {
        if k >= self.n_sampled() || self.n_sampled() == 1 {
            return Err(invalid(format!("cannot remove row {k} of {}", self.n_sampled())));
        }
        let keep: Vec<usize> = (0..self.n_sampled()).filter(|&r| r != k).collect();
        let indices = keep.iter().map(|&r| self.indices[r]).collect();
        let rows = self.row_block.select_rows(keep.iter());
        EgoSample::new(self.n_total, indices, rows)
    }

    /// Observed entry `(i, j)`, if either endpoint is sampled.
    pub fn observed(&self, i: usize, j: usize) -> Option<f64> {
        if let Some(k) = self.position[i] {
            Some(self.row_block[(k, j)])
        } else {
            self.position[j].map(|k| self.row_block[(k, i)])
        }
    }
}

pub(crate) fn in_sample_columns(rows: &Matrix, indices: &[usize]) -> Matrix {
    rows.select_columns(indices.iter())
}

/// Draws `n` distinct nodes uniformly without replacement and copies their
/// rows. Indices are returned in ascending order.
pub fn sample_ego<R: Rng + ?Sized>(a: &AdjacencyMatrix, n: usize, rng: &mut R) -> Result<EgoSample> {
    let total = a.n_nodes();
    if n == 0 || n > total {
        return Err(invalid(format!("sample size {n} outside 1..={total}")));
    }
    let mut indices = rand::seq::index::sample(rng, total, n).into_vec();
    indices.sort_unstable();
    EgoSample::from_rows(a.entries(), indices)
}

/// `‖A‖_F² / ‖A‖_2²`.
pub fn numerical_rank(a: &AdjacencyMatrix) -> Result<f64> {
    if a.n_edges() == 0 {
        return Err(Error::UndefinedValue("numerical rank of an empty graph".into()));
    }
    numerical_rank_of(a.entries())
}

/// Numerical rank of an arbitrary matrix.
pub fn numerical_rank_of(m: &Matrix) -> Result<f64> {
    let spec = linalg::spectral_norm(m);
    if spec == 0.0 {
        return Err(Error::UndefinedValue("numerical rank of a zero matrix".into()));
    }
    Ok(m.norm_squared() / (spec * spec))
}

/// Unordered pairs `(i, j)`, `i < j`, with neither endpoint in the sample.
pub fn unobserved_pairs(s: &EgoSample) -> impl Iterator<Item = (usize, usize)> {
    pairs_among(s.unsampled())
}

/// Unordered pairs among nodes in `0..n_total` that are not in `sampled`.
pub fn unobserved_pairs_of(n_total: usize, sampled: &[usize]) -> Vec<(usize, usize)> {
    let mut mask = vec![false; n_total];
    for &i in sampled {
        if i < n_total {
            mask[i] = true;
        }
    }
    let nodes: Vec<usize> = (0..n_total).filter(|&i| !mask[i]).collect();
    pairs_among(nodes).collect()
}

fn pairs_among(nodes: Vec<usize>) -> impl Iterator<Item = (usize, usize)> {
    let m = nodes.len();
    (0..m).flat_map(move |a| {
        let nodes = nodes.clone();
        ((a + 1)..m).map(move |b| (nodes[a], nodes[b]))
    })
}

/// Bidirectional map between external string labels and node ids.
#[derive(Debug, Clone, Default)]
pub struct LabelMap {
    labels: Vec<String>,
    ids: HashMap<String, usize>,
}

impl LabelMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Id for `label`, assigning the next free id on first sight.
    pub fn intern(&mut self, label: &str) -> usize {
        if let Some(&id) = self.ids.get(label) {
            return id;
        }
        let id = self.labels.len();
        self.labels.push(label.to_owned());
        self.ids.insert(label.to_owned(), id);
        id
    }

    pub fn id(&self, label: &str) -> Option<usize> {
        self.ids.get(label).copied()
    }

    pub fn label(&self, id: usize) -> Option<&str> {
        self.labels.get(id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}
