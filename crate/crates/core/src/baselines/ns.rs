use crate::error::{invalid, Result};
use crate::netcore::{EgoSample, ScoreMatrix};
use crate::Matrix;

/// Default quantile constant `C` in `h = C √(log N / N)`.
pub const DEFAULT_NS_BANDWIDTH_MULT: f64 = 1.0;

/// Neighborhood smoothing adapted to egocentric samples.
///
/// Similarity between nodes comes from `A_inᵀ A_in / n`, which only needs
/// the observed rows. The dissimilarity of `i` and `i'` is
/// `max_{k ≠ i, i'} |S_ik − S_i'k|`, and the neighborhood of `i` is every
/// node within the `h`-quantile of its dissimilarities. Node `i`'s row is
/// estimated by averaging the observed rows of its sampled neighbors; nodes
/// with no sampled neighbor fall back to the mean observed row. The result
/// is symmetrized.
pub fn ns_estimate(s: &EgoSample, bandwidth_mult: f64) -> Result<ScoreMatrix> {
    let n = s.n_sampled();
    if n < 2 {
        return Err(invalid(format!("neighborhood smoothing needs at least 2 sampled rows, got {n}")));
    }
    if !(bandwidth_mult > 0.0) {
        return Err(invalid("bandwidth multiplier must be positive"));
    }
    let big_n = s.n_total();
    let rows = s.row_block();
    let similarity = rows.transpose() * rows / n as f64;
    let dissim = dissimilarity(&similarity);

    let h = bandwidth_mult * ((big_n as f64).ln() / big_n as f64).sqrt();
    let mean_row: Vec<f64> = (0..big_n).map(|j| rows.column(j).mean()).collect();

    let mut smoothed = Matrix::zeros(big_n, big_n);
    let mut others = Vec::with_capacity(big_n);
    for i in 0..big_n {
        others.clear();
        others.extend((0..big_n).filter(|&k| k != i).map(|k| dissim[(i, k)]));
        let cutoff = quantile(&mut others, h);
        let neighbors: Vec<usize> = s
            .indices()
            .iter()
            .enumerate()
            .filter(|&(_, &node)| node == i || dissim[(i, node)] <= cutoff)
            .map(|(k, _)| k)
            .collect();
        if neighbors.is_empty() {
            for j in 0..big_n {
                smoothed[(i, j)] = mean_row[j];
            }
            continue;
        }
        let w = 1.0 / neighbors.len() as f64;
        for &k in &neighbors {
            for j in 0..big_n {
                smoothed[(i, j)] += w * rows[(k, j)];
            }
        }
    }
    ScoreMatrix::new(smoothed)
}

fn dissimilarity(sim: &Matrix) -> Matrix {
    let n = sim.nrows();
    let mut d = Matrix::zeros(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            let mut worst: f64 = 0.0;
            for k in 0..n {
                if k != a && k != b {
                    worst = worst.max((sim[(a, k)] - sim[(b, k)]).abs());
                }
            }
            d[(a, b)] = worst;
            d[(b, a)] = worst;
        }
    }
    d
}

/// Lower `h`-quantile: the `⌈h·m⌉`-th smallest of `m` values.
fn quantile(values: &mut [f64], h: f64) -> f64 {
    if values.is_empty() {
        return f64::NEG_INFINITY;
    }
    values.sort_by(f64::total_cmp);
    let rank = ((h * values.len() as f64).ceil() as usize).clamp(1, values.len());
    values[rank - 1]
}
