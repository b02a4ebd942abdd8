//! Link prediction for egocentrically sampled networks.
//!
//! An egocentric sample observes every edge incident to a random subset of
//! `n` out of `N` nodes, i.e. `n` full rows of the adjacency matrix. The
//! subspace estimator in [`estimator`] recovers a low-rank score matrix for
//! the whole network from those rows; [`baselines`] holds the comparison
//! methods, [`generators`] the synthetic network models, [`metrics`] the
//! ranking metrics on the unobserved block, and [`harness`] the seeded
//! experiment runner used by the `egolink` CLI.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod estimator;
pub mod generators;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod netcore;

pub use error::{Error, Result};
pub use estimator::{extract_embedding, se_estimate, select_rank, Embedding, RankChoice, SeConfig};
pub use metrics::{predictive_auc, predictive_kendall_tau, EvalResult};
pub use netcore::{
    numerical_rank, sample_ego, unobserved_pairs, AdjacencyMatrix, EgoSample, LabelMap,
    ProbabilityMatrix, ScoreMatrix,
};

/// Dense matrix type used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;

/// Seeded random source injected wherever randomness occurs.
pub type SeededRng = rand_chacha::ChaCha8Rng;

/// Builds a [`SeededRng`] from a 64-bit seed.
pub fn seeded_rng(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    SeededRng::seed_from_u64(seed)
}
