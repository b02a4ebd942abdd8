use std::io::{Read, Write};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::{DataSource, ExperimentSpec, Method, Regime};
use crate::baselines::{self, MaskedMatrix};
use crate::error::{Error, Result};
use crate::estimator::se_fit;
use crate::generators::{generate_model, sample_adjacency, ModelSpec};
use crate::io::load_edge_list;
use crate::metrics::evaluate;
use crate::netcore::{sample_ego, unobserved_pairs, AdjacencyMatrix, EgoSample, ProbabilityMatrix, ScoreMatrix};
use crate::seeded_rng;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "EGOLINK_WORKERS";

/// One fitted method on one replication of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub model: String,
    pub regime: String,
    pub method: String,
    pub rho: f64,
    pub degree: Option<f64>,
    pub replication: usize,
    pub seed: u64,
    pub auc: Option<f64>,
    pub kendall_tau: Option<f64>,
    pub selected_rank: Option<usize>,
    pub wall_time_ms: Option<f64>,
    /// Why metrics are missing, or a solver warning.
    pub note: Option<String>,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed for replication `rep` of cell `cell`. Distinct `(cell, rep)` pairs
/// map to distinct streams.
pub fn derive_seed(base_seed: u64, cell: u64, rep: u64) -> u64 {
    splitmix(splitmix(splitmix(base_seed) ^ cell) ^ rep)
}

const METHOD_STREAM: u64 = 0x6d65_7468_6f64;

fn worker_count(spec: &ExperimentSpec) -> usize {
    spec.workers
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse().ok()))
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

enum Source {
    Synthetic(ModelSpec),
    Dataset(Arc<AdjacencyMatrix>),
}

/// Runs every (cell, replication) task and returns the rows in
/// deterministic order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let source = match &spec.source {
        DataSource::Synthetic { family, n_nodes, .. } => Source::Synthetic(ModelSpec {
            family: *family,
            n_nodes: *n_nodes,
            target_degree: 1.0,
            seed: spec.base_seed,
        }),
        DataSource::Dataset { path, .. } => Source::Dataset(Arc::new(load_edge_list(path)?.adjacency)),
    };
    let cells = spec.cells();
    let tasks: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..spec.replications).map(move |r| (c, r)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(spec))
        .build()
        .map_err(|e| Error::Spec(format!("thread pool: {e}")))?;
    let per_task: Vec<Vec<ResultRow>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(c, r)| run_task(spec, &source, c, cells[c], r))
            .collect::<Result<_>>()
    })?;
    Ok(per_task.into_iter().flatten().collect())
}

fn run_task(
    spec: &ExperimentSpec,
    source: &Source,
    cell: usize,
    (degree, rho): (Option<f64>, f64),
    rep: usize,
) -> Result<Vec<ResultRow>> {
    let seed = derive_seed(spec.base_seed, cell as u64, rep as u64);
    let mut rng = seeded_rng(seed);

    let (a, p): (Arc<AdjacencyMatrix>, Option<ProbabilityMatrix>) = match source {
        Source::Synthetic(base) => {
            let model_spec = ModelSpec {
                target_degree: degree.expect("synthetic cells carry a degree"),
                seed,
                ..*base
            };
            let model = generate_model(&model_spec, &mut rng)?;
            let a = sample_adjacency(&model.probability, &mut rng);
            (Arc::new(a), Some(model.probability))
        }
        Source::Dataset(a) => (Arc::clone(a), None),
    };

    enum Observed {
        Ego(EgoSample),
        Mask(MaskedMatrix),
    }
    let observed = match spec.sampling.regime {
        Regime::Egocentric => {
            let n = ((rho * a.n_nodes() as f64).round() as usize).clamp(1, a.n_nodes());
            Observed::Ego(sample_ego(&a, n, &mut rng)?)
        }
        Regime::Iid => Observed::Mask(MaskedMatrix::iid(&a, rho, &mut rng)?),
    };
    let pairs: Vec<(usize, usize)> = match &observed {
        Observed::Ego(s) => unobserved_pairs(s).collect(),
        Observed::Mask(m) => m.unobserved_pairs(),
    };

    let mut rows = Vec::with_capacity(spec.methods.len());
    for &method in &spec.methods {
        let mut method_rng = seeded_rng(derive_seed(seed, METHOD_STREAM, method as u64));
        let start = Instant::now();
        let fitted: Result<(ScoreMatrix, Option<usize>, Option<String>)> = match (&observed, method) {
            (Observed::Ego(s), Method::Se) => {
                se_fit(s, &spec.se, &mut method_rng).map(|(sc, r)| (sc, Some(r), None))
            }
            (Observed::Ego(s), Method::Cur) => baselines::cur_estimate(s).map(|sc| (sc, None, None)),
            (Observed::Ego(s), Method::Ns) => {
                baselines::ns_estimate(s, spec.ns_bandwidth_mult).map(|sc| (sc, None, None))
            }
            (Observed::Ego(s), Method::Usvt) => {
                baselines::usvt_estimate(&MaskedMatrix::from_ego(s), spec.usvt_threshold_mult)
                    .map(|sc| (sc, None, None))
            }
            (Observed::Mask(m), Method::Usvt) => {
                baselines::usvt_estimate(m, spec.usvt_threshold_mult).map(|sc| (sc, None, None))
            }
            (Observed::Ego(s), Method::Mc) => mc(&MaskedMatrix::from_ego(s), spec),
            (Observed::Mask(m), Method::Mc) => mc(m, spec),
            (Observed::Mask(_), other) => Err(Error::Spec(format!("method `{other}` needs egocentric samples"))),
        };
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        let (eval, rank, note) = match fitted {
            Ok((scores, rank, note)) => (evaluate(&scores, &a, p.as_ref(), &pairs), rank, note),
            Err(e) => (Default::default(), None, Some(e.to_string())),
        };
        rows.push(ResultRow {
            model: spec.model_name(),
            regime: spec.sampling.regime.name().to_owned(),
            method: method.name().to_owned(),
            rho,
            degree,
            replication: rep,
            seed,
            auc: eval.auc,
            kendall_tau: eval.kendall_tau,
            selected_rank: rank,
            wall_time_ms: spec.record_timing.then_some(elapsed),
            note,
        });
    }
    Ok(rows)
}

fn mc(m: &MaskedMatrix, spec: &ExperimentSpec) -> Result<(ScoreMatrix, Option<usize>, Option<String>)> {
    let fit = baselines::mc_nuclear_estimate(m, &spec.mc)?;
    let note = (!fit.converged).then(|| format!("not converged after {} iterations", fit.iterations));
    Ok((fit.scores, None, note))
}

/// Writes rows as CSV with a fixed header.
pub fn write_results_csv(rows: &[ResultRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record([
            "model",
            "regime",
            "method",
            "rho",
            "degree",
            "replication",
            "seed",
            "auc",
            "kendall_tau",
            "selected_rank",
            "wall_time_ms",
            "note",
        ])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results_csv(input: impl Read) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::RankChoice;
    use crate::generators::ModelFamily;

    fn small(methods: Vec<Method>, reps: usize) -> ExperimentSpec {
        let mut spec = ExperimentSpec::synthetic(ModelFamily::Sbm, 60, vec![12.0], vec![0.3], methods, reps, 5);
        spec.se.rank = RankChoice::Fixed(3);
        spec
    }

    #[test]
    fn one_row_per_method_and_replication() {
        let rows = run_experiment(&small(vec![Method::Se], 1)).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].selected_rank, Some(3));
        assert!(rows[0].auc.is_some() && rows[0].kendall_tau.is_some());
        assert!(rows[0].wall_time_ms.is_none());

        let rows = run_experiment(&small(Method::ALL.to_vec(), 2)).unwrap();
        assert_eq!(rows.len(), 10);
        let methods: Vec<&str> = rows[..5].iter().map(|r| r.method.as_str()).collect();
        assert_eq!(methods, ["se", "cur", "usvt", "mc", "ns"]);
    }

    #[test]
    fn seeds_distinct_across_cells_and_reps() {
        let mut seen = std::collections::HashSet::new();
        for c in 0..20 {
            for r in 0..50 {
                assert!(seen.insert(derive_seed(9, c, r)));
            }
        }
    }

    #[test]
    fn method_subsets_share_samples() {
        let both = run_experiment(&small(vec![Method::Se, Method::Cur], 2)).unwrap();
        let only = run_experiment(&small(vec![Method::Cur], 2)).unwrap();
        assert_eq!(both[1], only[0]);
        assert_eq!(both[3], only[1]);
    }

    #[test]
    fn csv_round_trip() {
        let rows = run_experiment(&small(vec![Method::Se, Method::Usvt], 2)).unwrap();
        let mut buf = Vec::new();
        write_results_csv(&rows, &mut buf).unwrap();
        let back = read_results_csv(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn iid_regime_runs_completion_methods() {
        let mut spec = small(vec![Method::Usvt, Method::Mc], 1);
        spec.sampling.regime = Regime::Iid;
        let rows = run_experiment(&spec).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.regime == "iid" && r.auc.is_some()));
    }
}
