//! Ranking metrics on the unobserved block.
//!
//! Both statistics are computed over unordered node pairs `(i, j)`, `i < j`,
//! with neither endpoint sampled. Counting over ordered 4-tuples would give
//! every term the same multiplicity in numerator and denominator, so the
//! values are identical.

use crate::error::{Error, Result};
use crate::netcore::{unobserved_pairs_of, AdjacencyMatrix, ProbabilityMatrix, ScoreMatrix};

/// How a tie between a positive and a negative score is counted in AUC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieRule {
    /// Mann-Whitney convention: a tie counts ½.
    #[default]
    Half,
    /// Strict indicator `1(ŝ_pos > ŝ_neg)`: a tie counts 0.
    Zero,
}

/// Metrics for one fitted score matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvalResult {
    pub auc: Option<f64>,
    pub kendall_tau: Option<f64>,
    pub n_pairs: usize,
    pub n_positive: usize,
}

fn canonical(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::UndefinedMetric("NaN score".into()));
    }
    // Folds -0.0 onto 0.0 so ordering agrees with `>`.
    Ok(x + 0.0)
}

/// AUC of `scores` against binary `labels`, ties counted per `rule`.
///
/// Runs in `O(M log M)`: scores are sorted once and each tie group
/// contributes `pos_in_group · neg_below` wins and `pos_in_group · neg_in_group`
/// ties.
pub fn auc(scores: &[f64], labels: &[bool], rule: TieRule) -> Result<f64> {
    assert_eq!(scores.len(), labels.len(), "scores and labels differ in length");
    let mut items = Vec::with_capacity(scores.len());
    for (&s, &l) in scores.iter().zip(labels) {
        items.push((canonical(s)?, l));
    }
    let n_pos = items.iter().filter(|x| x.1).count() as u128;
    let n_neg = items.len() as u128 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric(format!(
            "AUC needs positives and negatives ({n_pos} positive, {n_neg} negative)"
        )));
    }
    items.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut wins: u128 = 0;
    let mut ties: u128 = 0;
    let mut neg_below: u128 = 0;
    let mut start = 0;
    while start < items.len() {
        let mut end = start;
        let (mut pos, mut neg) = (0u128, 0u128);
        while end < items.len() && items[end].0 == items[start].0 {
            if items[end].1 {
                pos += 1;
            } else {
                neg += 1;
            }
            end += 1;
        }
        wins += pos * neg_below;
        ties += pos * neg;
        neg_below += neg;
        start = end;
    }
    Ok(auc_ratio(wins, ties, n_pos * n_neg, rule))
}

/// Shared final division, so fast and brute-force routes round identically.
pub(crate) fn auc_ratio(wins: u128, ties: u128, couples: u128, rule: TieRule) -> f64 {
    match rule {
        TieRule::Half => (2 * wins + ties) as f64 / (2 * couples) as f64,
        TieRule::Zero => wins as f64 / couples as f64,
    }
}

/// `2·C/D − 1` where `D` counts couples with `p_a > p_b` and `C` those that
/// also have `ŝ_a > ŝ_b`. Strict on both sides.
pub fn kendall_tau(truth: &[f64], scores: &[f64]) -> Result<f64> {
    assert_eq!(truth.len(), scores.len(), "truth and scores differ in length");
    let m = truth.len();
    let mut items = Vec::with_capacity(m);
    for (&p, &s) in truth.iter().zip(scores) {
        items.push((canonical(p)?, canonical(s)?));
    }

    // Dense ranks of the scores, 1-based for the Fenwick tree.
    let mut sorted: Vec<f64> = items.iter().map(|x| x.1).collect();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let rank_of = |s: f64| sorted.partition_point(|&v| v < s) + 1;

    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut tree = Fenwick::new(sorted.len());
    let mut concordant: u128 = 0;
    let mut ordered: u128 = 0;
    let mut inserted: u128 = 0;
    let mut start = 0;
    while start < m {
        let mut end = start;
        while end < m && items[end].0 == items[start].0 {
            end += 1;
        }
        for item in &items[start..end] {
            concordant += tree.prefix(rank_of(item.1) - 1) as u128;
        }
        ordered += inserted * (end - start) as u128;
        for item in &items[start..end] {
            tree.add(rank_of(item.1));
        }
        inserted += (end - start) as u128;
        start = end;
    }
    if ordered == 0 {
        return Err(Error::UndefinedMetric("all true probabilities are tied".into()));
    }
    Ok(tau_ratio(concordant, ordered))
}

pub(crate) fn tau_ratio(concordant: u128, ordered: u128) -> f64 {
    2.0 * concordant as f64 / ordered as f64 - 1.0
}

struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Self { tree: vec![0; n + 1] }
    }

    fn add(&mut self, mut i: usize) {
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Count of inserted ranks in `1..=i`.
    fn prefix(&self, mut i: usize) -> u64 {
        let mut total = 0;
        while i > 0 {
            total += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        total
    }
}

/// AUC over an explicit list of node pairs.
pub fn auc_on_pairs(
    scores: &ScoreMatrix,
    a: &AdjacencyMatrix,
    pairs: &[(usize, usize)],
    rule: TieRule,
) -> Result<f64> {
    let s: Vec<f64> = pairs.iter().map(|&(i, j)| scores.get(i, j)).collect();
    let l: Vec<bool> = pairs.iter().map(|&(i, j)| a.has_edge(i, j)).collect();
    auc(&s, &l, rule)
}

/// Kendall's tau over an explicit list of node pairs.
pub fn kendall_tau_on_pairs(
    scores: &ScoreMatrix,
    p: &ProbabilityMatrix,
    pairs: &[(usize, usize)],
) -> Result<f64> {
    let t: Vec<f64> = pairs.iter().map(|&(i, j)| p.get(i, j)).collect();
    let s: Vec<f64> = pairs.iter().map(|&(i, j)| scores.get(i, j)).collect();
    kendall_tau(&t, &s)
}

/// Predictive AUC on pairs with neither endpoint in `sampled`, ties ½.
pub fn predictive_auc(scores: &ScoreMatrix, a: &AdjacencyMatrix, sampled: &[usize]) -> Result<f64> {
    let pairs = unobserved_pairs_of(a.n_nodes(), sampled);
    auc_on_pairs(scores, a, &pairs, TieRule::Half)
}

/// Predictive Kendall's tau on pairs with neither endpoint in `sampled`.
pub fn predictive_kendall_tau(
    scores: &ScoreMatrix,
    p: &ProbabilityMatrix,
    sampled: &[usize],
) -> Result<f64> {
    let pairs = unobserved_pairs_of(p.n_nodes(), sampled);
    kendall_tau_on_pairs(scores, p, &pairs)
}

/// Computes whichever metrics are defined on `pairs`. Kendall's tau needs
/// the true probabilities and is skipped without them.
pub fn evaluate(
    scores: &ScoreMatrix,
    a: &AdjacencyMatrix,
    p: Option<&ProbabilityMatrix>,
    pairs: &[(usize, usize)],
) -> EvalResult {
    let n_positive = pairs.iter().filter(|&&(i, j)| a.has_edge(i, j)).count();
    EvalResult {
        auc: auc_on_pairs(scores, a, pairs, TieRule::Half).ok(),
        kendall_tau: p.and_then(|p| kendall_tau_on_pairs(scores, p, pairs).ok()),
        n_pairs: pairs.len(),
        n_positive,
    }
}
