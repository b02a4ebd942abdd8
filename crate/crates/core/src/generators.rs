//! Synthetic latent-position network models with degree calibration.
//!
//! Each node gets an i.i.d. latent `X_i`, edges are Bernoulli with
//! probability `min(φ f(X_i, X_j), 1)`, and `φ` is tuned so the expected
//! average degree hits a target.
//!
//! | family   | `X_i`                          | `f(X_i, X_j)`                          |
//! |----------|--------------------------------|----------------------------------------|
//! | distance | 5-dim standard normal          | `1 / (1 + exp(‖X_i − X_j‖))`           |
//! | product  | 5 i.i.d. `Beta(0.5, 1)` coords | `X_iᵀ X_j`                             |
//! | sbm      | uniform block in `{1..5}`      | `0.05 + (b − 0.3)/6 · 1(b_i = b_j = b)` |

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::netcore::{AdjacencyMatrix, ProbabilityMatrix};
use crate::Matrix;

/// Latent dimension of the distance and product models, and block count of the SBM.
pub const LATENT_DIM: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFamily {
    Distance,
    Product,
    Sbm,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 3] = [ModelFamily::Distance, ModelFamily::Product, ModelFamily::Sbm];

    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::Distance => "distance",
            ModelFamily::Product => "product",
            ModelFamily::Sbm => "sbm",
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelFamily {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distance" => Ok(ModelFamily::Distance),
            "product" => Ok(ModelFamily::Product),
            "sbm" => Ok(ModelFamily::Sbm),
            other => Err(invalid(format!("unknown model family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: ModelFamily,
    pub n_nodes: usize,
    pub target_degree: f64,
    pub seed: u64,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 2 {
            return Err(invalid("a model needs at least two nodes"));
        }
        let max = (self.n_nodes - 1) as f64;
        if !(self.target_degree > 0.0 && self.target_degree <= max) {
            return Err(invalid(format!(
                "target degree {} outside (0, {max}]",
                self.target_degree
            )));
        }
        Ok(())
    }
}

/// A generated model: kernel, calibrated scale and probabilities.
#[derive(Debug, Clone)]
pub struct GeneratedModel {
    /// `f(X_i, X_j)` for all pairs, diagonal included.
    pub kernel: Matrix,
    pub phi: f64,
    pub probability: ProbabilityMatrix,
    /// Block labels `1..=5` for the SBM.
    pub blocks: Option<Vec<usize>>,
}

/// Latent kernel matrix `f(X_i, X_j)` (diagonal included) and SBM labels.
pub fn latent_kernel<R: Rng + ?Sized>(
    family: ModelFamily,
    n: usize,
    rng: &mut R,
) -> (Matrix, Option<Vec<usize>>) {
    match family {
        ModelFamily::Distance => {
            let x = Matrix::from_fn(LATENT_DIM, n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let f = Matrix::from_fn(n, n, |i, j| {
                let dist = (x.column(i) - x.column(j)).norm();
                1.0 / (1.0 + dist.exp())
            });
            (f, None)
        }
        ModelFamily::Product => {
            let beta = Beta::new(0.5, 1.0).expect("valid shape parameters");
            let x = Matrix::from_fn(LATENT_DIM, n, |_, _| beta.sample(rng));
            (crate::linalg::symmetrize(&(x.transpose() * &x)), None)
        }
        ModelFamily::Sbm => {
            let blocks: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=LATENT_DIM)).collect();
            let f = Matrix::from_fn(n, n, |i, j| sbm_kernel(blocks[i], blocks[j]));
            (f, Some(blocks))
        }
    }
}

/// SBM kernel for blocks `a`, `b` in `1..=5`.
pub fn sbm_kernel(a: usize, b: usize) -> f64 {
    if a == b {
        0.05 + (a as f64 - 0.3) / 6.0
    } else {
        0.05
    }
}

fn expected_degree(f: &Matrix, phi: f64) -> f64 {
    let n = f.nrows();
    let mut total = 0.0;
    for j in 0..n {
        for i in 0..j {
            total += (phi * f[(i, j)]).min(1.0);
        }
    }
    2.0 * total / n as f64
}

/// Scale `φ` with `(2/N) Σ_{i<j} min(φ f_ij, 1) = target_degree`.
pub fn calibrate_phi(f: &Matrix, target_degree: f64) -> Result<f64> {
    let n = f.nrows();
    if n < 2 || f.ncols() != n {
        return Err(invalid("kernel must be square with at least two nodes"));
    }
    let mut sum = 0.0;
    let mut max_f: f64 = 0.0;
    let mut min_pos = f64::INFINITY;
    let mut support = 0usize;
    for j in 0..n {
        for i in 0..j {
            let v = f[(i, j)];
            if !(v >= 0.0) || !v.is_finite() || v != f[(j, i)] {
                return Err(invalid(format!("kernel entry ({i}, {j}) is not symmetric nonnegative")));
            }
            if v > 0.0 {
                sum += v;
                max_f = max_f.max(v);
                min_pos = min_pos.min(v);
                support += 1;
            }
        }
    }
    if support == 0 {
        return Err(invalid("kernel is identically zero off the diagonal"));
    }
    if !(target_degree > 0.0) || target_degree > (n - 1) as f64 {
        return Err(invalid(format!(
            "target degree {target_degree} outside (0, {}]",
            n - 1
        )));
    }
    let reachable = 2.0 * support as f64 / n as f64;
    if target_degree > reachable * (1.0 + 1e-12) {
        return Err(invalid(format!(
            "target degree {target_degree} unreachable; at most {reachable}"
        )));
    }

    // No saturation: the degree is linear in φ.
    let linear = target_degree * n as f64 / (2.0 * sum);
    if linear * max_f <= 1.0 {
        return Ok(linear);
    }
    let (mut lo, mut hi) = (linear, 1.0 / min_pos);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if expected_degree(f, mid) < target_degree {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Draws latent positions, calibrates `φ` and returns the model.
pub fn generate_model<R: Rng + ?Sized>(spec: &ModelSpec, rng: &mut R) -> Result<GeneratedModel> {
    spec.validate()?;
    let (kernel, blocks) = latent_kernel(spec.family, spec.n_nodes, rng);
    let phi = calibrate_phi(&kernel, spec.target_degree)?;
    let mut p = kernel.map(|v| (phi * v).min(1.0));
    p.fill_diagonal(0.0);
    Ok(GeneratedModel {
        kernel,
        phi,
        probability: ProbabilityMatrix::new(p)?,
        blocks,
    })
}

/// Probability matrix of a freshly drawn model.
pub fn generate_probability<R: Rng + ?Sized>(spec: &ModelSpec, rng: &mut R) -> Result<ProbabilityMatrix> {
    Ok(generate_model(spec, rng)?.probability)
}

/// Independent Bernoulli edges on the upper triangle, mirrored.
pub fn sample_adjacency<R: Rng + ?Sized>(p: &ProbabilityMatrix, rng: &mut R) -> AdjacencyMatrix {
    let n = p.n_nodes();
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < p.get(i, j) {
                a[(i, j)] = 1.0;
                a[(j, i)] = 1.0;
            }
        }
    }
    AdjacencyMatrix::from_trusted(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    fn spec(family: ModelFamily, n: usize, d: f64) -> ModelSpec {
        ModelSpec {
            family,
            n_nodes: n,
            target_degree: d,
            seed: 0,
        }
    }

    #[test]
    fn sbm_kernel_values() {
        assert!((sbm_kernel(1, 1) - (0.05 + 0.7 / 6.0)).abs() < 1e-15);
        assert!((sbm_kernel(1, 1) - 0.1667).abs() < 1e-4);
        assert_eq!(sbm_kernel(1, 3), 0.05);
        assert!((sbm_kernel(5, 5) - (0.05 + 4.7 / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn constant_kernel_closed_form() {
        let f = Matrix::from_element(500, 500, 1.0);
        let phi = calibrate_phi(&f, 100.0).unwrap();
        assert!((phi - 100.0 / 499.0).abs() < 1e-12);
        let half = Matrix::from_element(500, 500, 0.5);
        let phi = calibrate_phi(&half, 100.0).unwrap();
        assert!((phi - 100.0 / (0.5 * 499.0)).abs() < 1e-12);
        assert!((expected_degree(&half, phi) - 100.0).abs() < 1e-9);
    }

    #[test]
    fn saturating_calibration_uses_bisection() {
        let f = Matrix::from_fn(60, 60, |i, j| if (i + j) % 3 == 0 { 1.0 } else { 0.05 });
        let f = linalg::symmetrize(&f);
        let phi = calibrate_phi(&f, 40.0).unwrap();
        assert!(phi * 1.0 > 1.0);
        assert!((expected_degree(&f, phi) - 40.0).abs() < 1e-6);
    }

    #[test]
    fn unreachable_degree_rejected() {
        let f = Matrix::from_element(10, 10, 1.0);
        assert!(calibrate_phi(&f, 9.5).is_err());
        let sparse = Matrix::from_fn(10, 10, |i, j| if i + j == 9 && i != j { 1.0 } else { 0.0 });
        assert!(calibrate_phi(&sparse, 5.0).is_err());
        assert!(calibrate_phi(&Matrix::zeros(5, 5), 1.0).is_err());
    }

    #[test]
    fn calibration_monotone_in_target() {
        let (f, _) = latent_kernel(ModelFamily::Distance, 80, &mut crate::seeded_rng(5));
        let mut last = 0.0;
        for d in [1.0, 5.0, 20.0, 50.0, 70.0] {
            let phi = calibrate_phi(&f, d).unwrap();
            assert!(phi > last);
            last = phi;
        }
    }

    #[test]
    fn probability_invariants_every_family() {
        for family in ModelFamily::ALL {
            for seed in 0..3 {
                let p = generate_probability(&spec(family, 50, 10.0), &mut crate::seeded_rng(seed)).unwrap();
                let m = p.entries();
                assert_eq!(m, &m.transpose());
                assert!(m.iter().all(|&x| (0.0..=1.0).contains(&x)));
                assert!((0..50).all(|i| m[(i, i)] == 0.0));
                assert!((p.expected_degree() - 10.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn product_and_sbm_have_rank_five() {
        for family in [ModelFamily::Product, ModelFamily::Sbm] {
            let model = generate_model(&spec(family, 200, 40.0), &mut crate::seeded_rng(9)).unwrap();
            let scaled = &model.kernel * model.phi;
            assert_eq!(linalg::numeric_rank(&scaled, 1e-10).unwrap(), 5, "{family}");
        }
    }

    #[test]
    fn sbm_has_five_distinct_rows() {
        let model = generate_model(&spec(ModelFamily::Sbm, 100, 20.0), &mut crate::seeded_rng(1)).unwrap();
        let mut rows: Vec<Vec<u64>> = (0..100)
            .map(|i| model.kernel.row(i).iter().map(|x| x.to_bits()).collect())
            .collect();
        rows.sort();
        rows.dedup();
        assert_eq!(rows.len(), 5);
    }

    #[test]
    fn degenerate_adjacency_draws() {
        let zero = ProbabilityMatrix::new(Matrix::zeros(20, 20)).unwrap();
        assert_eq!(sample_adjacency(&zero, &mut crate::seeded_rng(1)).n_edges(), 0);
        let mut ones = Matrix::from_element(20, 20, 1.0);
        ones.fill_diagonal(0.0);
        let full = ProbabilityMatrix::new(ones).unwrap();
        assert_eq!(sample_adjacency(&full, &mut crate::seeded_rng(1)).n_edges(), 190);
    }

    #[test]
    fn adjacency_draw_is_seeded() {
        let p = generate_probability(&spec(ModelFamily::Sbm, 60, 8.0), &mut crate::seeded_rng(2)).unwrap();
        let a = sample_adjacency(&p, &mut crate::seeded_rng(3));
        let b = sample_adjacency(&p, &mut crate::seeded_rng(3));
        assert_eq!(a, b);
    }

    #[test]
    fn edge_count_concentrates() {
        // Binomial(C(500,2), 0.3): 99% of draws within 3 standard deviations.
        let n = 500;
        let mut m = Matrix::from_element(n, n, 0.3);
        m.fill_diagonal(0.0);
        let p = ProbabilityMatrix::new(m).unwrap();
        let pairs = (n * (n - 1) / 2) as f64;
        let mean = 0.3 * pairs;
        let sd = (pairs * 0.3 * 0.7).sqrt();
        let draws = 1000;
        let inside = (0..draws)
            .filter(|&seed| {
                let e = sample_adjacency(&p, &mut crate::seeded_rng(seed)).n_edges() as f64;
                (e - mean).abs() <= 3.0 * sd
            })
            .count();
        assert!(inside as f64 >= 0.99 * draws as f64, "{inside} of {draws}");
    }
}
