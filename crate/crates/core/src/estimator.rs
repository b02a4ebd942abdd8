//! Subspace estimation.
//!
//! Given the observed rows `A_in` (n × N) of an egocentric sample:
//!
//! 1. `P̃_in` is the best rank-r approximation of `A_in`.
//! 2. `P̂ = ½ P̃_inᵀ (P̃_11⁺ + (P̃_11ᵀ)⁺) P̃_in`, where `P̃_11` holds the
//!    in-sample columns of `P̃_in`.
//!
//! Writing `P̃_in = U_r D_r V_rᵀ` gives the factorization
//! `P̂ = R̂ᵀ Ẑ R̂` with `R̂ = V_rᵀ` and `Ẑ = D_r U_rᵀ X̂ U_r D_r`, which is
//! how the estimate is actually assembled.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, SvdTriple, DEFAULT_PINV_REL_TOL};
use crate::metrics::{auc, TieRule};
use crate::netcore::{EgoSample, ScoreMatrix};
use crate::Matrix;

/// Rank used by the subspace estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankChoice {
    /// Chosen by row-resampling cross-validation.
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeConfig {
    pub rank: RankChoice,
    /// Held-out rows per rank selection; `None` means `min(n, 30)`.
    pub cv_holdout_rows: Option<usize>,
    /// Candidate ranks; `None` means `1..=min(n - 1, 20)`.
    pub cv_rank_grid: Option<Vec<usize>>,
    pub pinv_rel_tol: f64,
}

impl Default for SeConfig {
    fn default() -> Self {
        Self {
            rank: RankChoice::Auto,
            cv_holdout_rows: None,
            cv_rank_grid: None,
            pinv_rel_tol: DEFAULT_PINV_REL_TOL,
        }
    }
}

impl SeConfig {
    pub fn with_rank(r: usize) -> Self {
        Self {
            rank: RankChoice::Fixed(r),
            ..Self::default()
        }
    }

    fn holdouts(&self, n: usize) -> usize {
        self.cv_holdout_rows.unwrap_or(30).min(n)
    }

    fn grid(&self, n: usize) -> Vec<usize> {
        match &self.cv_rank_grid {
            Some(g) => g.clone(),
            None => (1..=n.saturating_sub(1).min(20)).collect(),
        }
    }
}

/// Node positions `R̂` (r × N) and the inner-product form `Ẑ` (r × r).
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub positions: Matrix,
    pub form: Matrix,
}

impl Embedding {
    pub fn rank(&self) -> usize {
        self.form.nrows()
    }

    /// `R̂ᵀ Ẑ R̂`.
    pub fn scores(&self) -> ScoreMatrix {
        let m = self.positions.transpose() * &self.form * &self.positions;
        ScoreMatrix::new(m).expect("square by construction")
    }
}

fn explicit_rank(s: &EgoSample, cfg: &SeConfig) -> Result<usize> {
    let r = match cfg.rank {
        RankChoice::Fixed(r) => r,
        RankChoice::Auto => {
            return Err(invalid("explicit rank required; use select_rank or se_fit for auto"))
        }
    };
    if r == 0 || r > s.n_sampled() {
        return Err(invalid(format!("rank {r} outside 1..={}", s.n_sampled())));
    }
    Ok(r)
}

/// Inner form `Ẑ` from a truncated SVD of the observed rows.
///
/// With `B = U_r D_r` and `C` the in-sample rows of `V_r`, the in-sample
/// block is `P̃_11 = B Cᵀ`. Thin QR factors `B = Q₁R₁`, `C = Q₂R₂` give
/// `P̃_11⁺ = Q₂ K⁺ Q₁ᵀ` with `K = R₁R₂ᵀ`, so only an r × r pseudo-inverse is
/// needed, and `Bᵀ P̃_11⁺ B = (Q₂ᵀB)ᵀ K⁺ R₁`.
fn inner_form(trunc: &SvdTriple, indices: &[usize], rel_tol: f64) -> Result<Matrix> {
    let r = trunc.rank();
    let mut b = trunc.u.clone();
    for k in 0..r {
        b.column_mut(k).scale_mut(trunc.d[k]);
    }
    let c = trunc.v.select_rows(indices.iter());
    let r1 = b.clone().qr().r();
    let qr_c = c.qr();
    let (q2, r2) = (qr_c.q(), qr_c.r());
    let k = &r1 * r2.transpose();
    // Rounding noise in an otherwise empty block would be inverted into
    // enormous scores, so the test is relative to the leading singular value.
    if k.norm() <= rel_tol * trunc.d[0] {
        return Err(Error::DegenerateSample(
            "in-sample block of the rank-r approximation is zero".into(),
        ));
    }
    let k_pinv = linalg::pseudo_inverse(&k, rel_tol)?;
    let half = (q2.transpose() * &b).transpose() * k_pinv * r1;
    Ok(linalg::symmetrize(&half))
}

fn embed(s: &EgoSample, r: usize, rel_tol: f64) -> Result<Embedding> {
    let trunc = linalg::truncated_svd(s.row_block(), r)?;
    let form = inner_form(&trunc, s.indices(), rel_tol)?;
    Ok(Embedding {
        positions: trunc.v.transpose(),
        form,
    })
}

/// Subspace estimate `P̂` at the configured explicit rank.
pub fn se_estimate(s: &EgoSample, cfg: &SeConfig) -> Result<ScoreMatrix> {
    let r = explicit_rank(s, cfg)?;
    Ok(embed(s, r, cfg.pinv_rel_tol)?.scores())
}

/// Factorization `P̂ = R̂ᵀ Ẑ R̂` of the subspace estimate.
pub fn extract_embedding(s: &EgoSample, cfg: &SeConfig) -> Result<Embedding> {
    let r = explicit_rank(s, cfg)?;
    embed(s, r, cfg.pinv_rel_tol)
}

/// Fits the estimator, selecting the rank first when it is `Auto`.
/// Returns the scores and the rank used.
pub fn se_fit<R: Rng + ?Sized>(
    s: &EgoSample,
    cfg: &SeConfig,
    rng: &mut R,
) -> Result<(ScoreMatrix, usize)> {
    let r = match cfg.rank {
        RankChoice::Fixed(r) => r,
        RankChoice::Auto => select_rank(s, cfg, rng)?,
    };
    let fixed = SeConfig {
        rank: RankChoice::Fixed(r),
        ..cfg.clone()
    };
    Ok((se_estimate(s, &fixed)?, r))
}

/// Chooses the rank by deleting sampled rows one at a time.
///
/// For each held-out row `k` and candidate `r` the estimator is refit on the
/// remaining rows and scored by AUC on the held-out entries `A_ki`,
/// `i ∉ I`. The candidate with the largest mean AUC wins; ties go to the
/// smaller rank. A fit that degenerates scores 0.5, the AUC of constant
/// scores.
pub fn select_rank<R: Rng + ?Sized>(s: &EgoSample, cfg: &SeConfig, rng: &mut R) -> Result<usize> {
    let n = s.n_sampled();
    if n < 3 {
        return Err(invalid(format!("rank selection needs at least 3 sampled rows, got {n}")));
    }
    let mut grid = cfg.grid(n);
    grid.sort_unstable();
    grid.dedup();
    if grid.is_empty() {
        return Err(invalid("rank grid is empty"));
    }
    if let Some(&bad) = grid.iter().find(|&&r| r == 0 || r >= n) {
        return Err(invalid(format!("candidate rank {bad} outside 1..{n}")));
    }
    let t = cfg.holdouts(n);
    if t == 0 {
        return Err(invalid("at least one held-out row is required"));
    }
    if grid.len() == 1 {
        return Ok(grid[0]);
    }

    let held_out = rand::seq::index::sample(rng, n, t).into_vec();
    let targets = s.unsampled();
    let max_rank = *grid.last().expect("nonempty");

    let per_holdout: Vec<Option<Vec<f64>>> = held_out
        .par_iter()
        .map(|&k| holdout_aucs(s, k, &targets, &grid, max_rank, cfg.pinv_rel_tol))
        .collect::<Result<_>>()?;

    let valid: Vec<&Vec<f64>> = per_holdout.iter().flatten().collect();
    if valid.is_empty() {
        return Err(Error::DegenerateCv(
            "no held-out row has both links and non-links among unsampled nodes".into(),
        ));
    }
    let mut best = (grid[0], f64::NEG_INFINITY);
    for (g, &r) in grid.iter().enumerate() {
        let mean = valid.iter().map(|v| v[g]).sum::<f64>() / valid.len() as f64;
        if mean > best.1 {
            best = (r, mean);
        }
    }
    Ok(best.0)
}

fn holdout_aucs(
    s: &EgoSample,
    k: usize,
    targets: &[usize],
    grid: &[usize],
    max_rank: usize,
    rel_tol: f64,
) -> Result<Option<Vec<f64>>> {
    let node = s.indices()[k];
    let labels: Vec<bool> = targets.iter().map(|&i| s.row_block()[(k, i)] != 0.0).collect();
    if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        return Ok(None);
    }
    let rest = s.without_row(k)?;
    let svd = linalg::full_svd(rest.row_block())?;
    let max_rank = max_rank.min(svd.rank());

    let mut out = Vec::with_capacity(grid.len());
    for &r in grid {
        let trunc = svd.truncate(r.min(max_rank));
        let value = match inner_form(&trunc, rest.indices(), rel_tol) {
            Ok(z) => {
                // Row `node` of V_r Ẑ V_rᵀ, restricted to the target columns.
                let left = trunc.v.row(node) * &z;
                let scores: Vec<f64> = targets
                    .iter()
                    .map(|&i| left.dot(&trunc.v.row(i)))
                    .collect();
                auc(&scores, &labels, TieRule::Half)?
            }
            Err(Error::DegenerateSample(_)) => 0.5,
            Err(e) => return Err(e),
        };
        out.push(value);
    }
    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn gaussian(rows: usize, cols: usize, seed: u64) -> Matrix {
        use rand_distr::StandardNormal;
        let mut rng = crate::seeded_rng(seed);
        Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
    }

    #[test]
    fn noiseless_psd_rows_recover_p() {
        let x = gaussian(2, 12, 1);
        let p = x.transpose() * &x;
        let s = EgoSample::from_rows(&p, vec![0, 3, 5, 9]).unwrap();
        let est = se_estimate(&s, &SeConfig::with_rank(2)).unwrap();
        assert!((est.entries() - &p).norm() < 1e-8);

        let emb = extract_embedding(&s, &SeConfig::with_rank(2)).unwrap();
        let eig = linalg::symmetric_eigenvalues(&emb.form).unwrap();
        assert!(eig.iter().all(|&l| l >= -1e-8));
    }

    /// `P̂` straight from the definition, with a full pseudo-inverse.
    fn direct_estimate(s: &EgoSample, r: usize) -> Matrix {
        let t = linalg::truncated_svd(s.row_block(), r).unwrap();
        let p_in = t.reconstruct();
        let p11 = p_in.select_columns(s.indices().iter());
        let x = linalg::symmetrize(&linalg::pseudo_inverse(&p11, 1e-10).unwrap());
        p_in.transpose() * x * p_in
    }

    #[test]
    fn matches_direct_formula_on_noisy_rows() {
        for seed in 0..20 {
            let mut rng = crate::seeded_rng(seed);
            let n_total = 40;
            let mut a = Matrix::zeros(n_total, n_total);
            for i in 0..n_total {
                for j in (i + 1)..n_total {
                    let e = if rng.gen_bool(0.3) { 1.0 } else { 0.0 };
                    a[(i, j)] = e;
                    a[(j, i)] = e;
                }
            }
            let n = rng.gen_range(6..15);
            let mut idx = rand::seq::index::sample(&mut rng, n_total, n).into_vec();
            idx.sort_unstable();
            let s = EgoSample::from_rows(&a, idx).unwrap();
            for r in 1..=n.min(6) {
                let fast = se_estimate(&s, &SeConfig::with_rank(r)).unwrap();
                let slow = direct_estimate(&s, r);
                let err = (fast.entries() - &slow).norm() / slow.norm();
                assert!(err < 1e-9, "seed {seed} r {r}: {err:e}");
            }
        }
    }

    #[test]
    fn full_sampling_exact_rank() {
        let x = gaussian(3, 10, 2);
        let sign = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0, 1.0]));
        let p = x.transpose() * sign * &x;
        let s = EgoSample::from_rows(&p, (0..10).collect()).unwrap();
        let est = se_estimate(&s, &SeConfig::with_rank(3)).unwrap();
        assert!((est.entries() - &p).norm() < 1e-6 * p.norm());
    }

    #[test]
    fn rank_above_sample_size_rejected() {
        let p = Matrix::identity(6, 6);
        let s = EgoSample::from_rows(&p, vec![1, 2]).unwrap();
        assert!(matches!(
            se_estimate(&s, &SeConfig::with_rank(3)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            se_estimate(&s, &SeConfig::default()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn zero_in_sample_block_is_degenerate() {
        // Sampled nodes 0 and 1 only connect to outsiders, but the rank-1
        // truncation keeps those columns; make the rows orthogonal to I.
        let mut rows = Matrix::zeros(2, 5);
        rows[(0, 3)] = 1.0;
        rows[(1, 4)] = 1.0;
        let s = EgoSample::new(5, vec![0, 1], rows).unwrap();
        assert!(matches!(
            se_estimate(&s, &SeConfig::with_rank(1)),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn embedding_reconstructs_and_has_shape() {
        let x = gaussian(3, 15, 3);
        let p = x.transpose() * &x;
        let mut noisy = p.clone();
        let mut rng = crate::seeded_rng(5);
        for i in 0..15 {
            for j in i..15 {
                let e: f64 = rng.gen_range(-0.1..0.1);
                noisy[(i, j)] += e;
                noisy[(j, i)] = noisy[(i, j)];
            }
        }
        let s = EgoSample::from_rows(&noisy, vec![0, 2, 4, 6, 8, 11]).unwrap();
        for r in 1..=4 {
            let cfg = SeConfig::with_rank(r);
            let emb = extract_embedding(&s, &cfg).unwrap();
            assert_eq!(emb.form.shape(), (r, r));
            assert_eq!(emb.positions.shape(), (r, 15));
            let est = se_estimate(&s, &cfg).unwrap();
            assert!((emb.scores().entries() - est.entries()).norm() < 1e-8);
            // At most r singular values above the noise floor.
            let svd = linalg::full_svd(est.entries()).unwrap();
            let big = svd.d.iter().filter(|&&d| d > 1e-8 * svd.d[0]).count();
            assert!(big <= r);
        }
    }

    #[test]
    fn singleton_grid_short_circuits() {
        let p = Matrix::from_element(8, 8, 0.5);
        let s = EgoSample::from_rows(&p, vec![0, 1, 2, 3]).unwrap();
        let cfg = SeConfig {
            cv_rank_grid: Some(vec![1]),
            ..SeConfig::default()
        };
        assert_eq!(select_rank(&s, &cfg, &mut crate::seeded_rng(0)).unwrap(), 1);
    }

    #[test]
    fn select_rank_preconditions() {
        let p = Matrix::from_element(8, 8, 1.0);
        let s = EgoSample::from_rows(&p, vec![0, 1]).unwrap();
        assert!(select_rank(&s, &SeConfig::default(), &mut crate::seeded_rng(0)).is_err());
        let s = EgoSample::from_rows(&p, vec![0, 1, 2, 3]).unwrap();
        let cfg = SeConfig {
            cv_rank_grid: Some(vec![2, 4]),
            ..SeConfig::default()
        };
        assert!(matches!(
            select_rank(&s, &cfg, &mut crate::seeded_rng(0)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn all_empty_holdouts_are_degenerate() {
        // Complete graph: every held-out row is all positives.
        let mut p = Matrix::from_element(10, 10, 1.0);
        p.fill_diagonal(0.0);
        let s = EgoSample::from_rows(&p, vec![0, 1, 2, 3, 4]).unwrap();
        assert!(matches!(
            select_rank(&s, &SeConfig::default(), &mut crate::seeded_rng(1)),
            Err(Error::DegenerateCv(_))
        ));
    }

    #[test]
    fn permutation_equivariance() {
        let x = gaussian(2, 14, 9);
        let mut p = x.transpose() * &x;
        let mut rng = crate::seeded_rng(10);
        for i in 0..14 {
            for j in i..14 {
                let e: f64 = rng.gen_range(-0.3..0.3);
                p[(i, j)] += e;
                p[(j, i)] = p[(i, j)];
            }
        }
        let idx = vec![1, 4, 6, 10, 12];
        let s = EgoSample::from_rows(&p, idx.clone()).unwrap();
        let base = se_estimate(&s, &SeConfig::with_rank(2)).unwrap();

        let mut perm: Vec<usize> = (0..14).collect();
        perm.reverse();
        perm.swap(0, 5);
        let permuted = Matrix::from_fn(14, 14, |a, b| p[(perm[a], perm[b])]);
        let inv: Vec<usize> = {
            let mut inv = vec![0; 14];
            for (a, &pa) in perm.iter().enumerate() {
                inv[pa] = a;
            }
            inv
        };
        let new_idx: Vec<usize> = idx.iter().map(|&i| inv[i]).collect();
        let s2 = EgoSample::from_rows(&permuted, new_idx).unwrap();
        let moved = se_estimate(&s2, &SeConfig::with_rank(2)).unwrap();
        for a in 0..14 {
            for b in 0..14 {
                let want = base.get(perm[a], perm[b]);
                assert!((moved.get(a, b) - want).abs() < 1e-9 * (1.0 + want.abs()));
            }
        }
    }
}
