//! Fixtures shared by the estimator benchmarks.

use egolink::generators::{generate_model, sample_adjacency, ModelFamily, ModelSpec};
use egolink::{sample_ego, seeded_rng, AdjacencyMatrix, EgoSample};

/// A seeded SBM graph and an egocentric sample of it.
pub fn sbm_fixture(n_nodes: usize, degree: f64, rho: f64, seed: u64) -> (AdjacencyMatrix, EgoSample) {
    let mut rng = seeded_rng(seed);
    let spec = ModelSpec { family: ModelFamily::Sbm, n_nodes, target_degree: degree, seed };
    let model = generate_model(&spec, &mut rng).expect("valid fixture spec");
    let a = sample_adjacency(&model.probability, &mut rng);
    let n = ((rho * n_nodes as f64).round() as usize).max(3);
    let s = sample_ego(&a, n, &mut rng).expect("valid sample size");
    (a, s)
}
