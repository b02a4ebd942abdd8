use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use egolink::baselines::{self, MaskedMatrix, McParams};
use egolink::estimator::se_fit;
use egolink::generators::{generate_model, sample_adjacency, ModelFamily, ModelSpec};
use egolink::harness::{read_results_csv, run_experiment, summarize, write_results_csv, write_summary_csv, ExperimentSpec};
use egolink::io::{load_adjacency, read_matrix_csv, write_edge_list, write_matrix_csv, LoadedGraph};
use egolink::metrics::evaluate;
use egolink::{sample_ego, seeded_rng, unobserved_pairs, EgoSample, Error, ProbabilityMatrix, RankChoice, ScoreMatrix, SeConfig};

/// Link prediction for egocentrically sampled networks.
#[derive(Parser)]
#[command(name = "egolink", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic network from one of the latent-variable families.
    Generate {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        nodes: usize,
        /// Target expected average degree.
        #[arg(long)]
        degree: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Edge list output.
        #[arg(long)]
        graph: PathBuf,
        /// Optional dense CSV of the probability matrix.
        #[arg(long)]
        probability: Option<PathBuf>,
    },
    /// Pick sampled nodes (egos) uniformly without replacement.
    Sample {
        #[arg(long)]
        graph: PathBuf,
        /// Fraction of nodes to sample.
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// One node label per line; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate link scores from the rows of the sampled nodes.
    Predict {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        sample: PathBuf,
        #[arg(long, value_enum, default_value_t = PredictMethod::Se)]
        method: PredictMethod,
        /// SE rank: a positive integer or `auto`.
        #[arg(long, default_value = "auto")]
        rank: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Dense score matrix; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Predictive AUC (and Kendall's tau given true probabilities).
    Evaluate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        sample: PathBuf,
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        probability: Option<PathBuf>,
    },
    /// Run a TOML experiment spec and write one CSV row per fit.
    Experiment {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-curve-point means and standard errors.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long, env = "EGOLINK_WORKERS")]
        workers: Option<usize>,
    },
    /// Aggregate a results CSV into means and standard errors.
    Summarize {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Node count, edge count, average degree and numerical rank.
    Stats {
        #[arg(long)]
        graph: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Distance,
    Product,
    Sbm,
}

impl From<Family> for ModelFamily {
    fn from(f: Family) -> Self {
        match f {
            Family::Distance => ModelFamily::Distance,
            Family::Product => ModelFamily::Product,
            Family::Sbm => ModelFamily::Sbm,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PredictMethod {
    Se,
    Cur,
    Usvt,
    Mc,
    Ns,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn parse_rank(text: &str) -> Result<RankChoice> {
    if text == "auto" {
        return Ok(RankChoice::Auto);
    }
    match text.parse::<usize>() {
        Ok(r) if r > 0 => Ok(RankChoice::Fixed(r)),
        _ => Err(Error::Spec(format!("rank must be a positive integer or `auto`, got `{text}`")).into()),
    }
}

fn load_sample(graph: &LoadedGraph, path: &Path) -> Result<EgoSample> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Ingestion {
        path: path.to_owned(),
        line: 0,
        message: e.to_string(),
    })?;
    let mut indices = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let label = line.trim();
        if label.is_empty() || label.starts_with('#') {
            continue;
        }
        let id = graph.labels.id(label).ok_or_else(|| Error::Ingestion {
            path: path.to_owned(),
            line: k + 1,
            message: format!("node `{label}` is not in the graph"),
        })?;
        indices.push(id);
    }
    indices.sort_unstable();
    indices.dedup();
    Ok(EgoSample::from_rows(graph.adjacency.entries(), indices)?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { family, nodes, degree, seed, graph, probability } => {
            let spec = ModelSpec { family: family.into(), n_nodes: nodes, target_degree: degree, seed };
            let mut rng = seeded_rng(seed);
            let model = generate_model(&spec, &mut rng)?;
            let a = sample_adjacency(&model.probability, &mut rng);
            let mut out = output(Some(&graph))?;
            write_edge_list(&a, &mut out)?;
            out.flush()?;
            if let Some(p) = probability {
                write_matrix_csv(model.probability.entries(), output(Some(&p))?)?;
            }
            eprintln!("phi {:.6}, {} edges, average degree {:.2}", model.phi, a.n_edges(), a.average_degree());
        }
        Command::Sample { graph, rho, seed, out } => {
            let g = load_adjacency(&graph)?;
            let total = g.adjacency.n_nodes();
            if !(rho > 0.0 && rho <= 1.0) {
                bail!(Error::Spec(format!("rho must lie in (0, 1], got {rho}")));
            }
            let n = ((rho * total as f64).round() as usize).clamp(1, total);
            let s = sample_ego(&g.adjacency, n, &mut seeded_rng(seed))?;
            let mut w = output(out.as_deref())?;
            for &i in s.indices() {
                writeln!(w, "{}", g.labels.label(i).expect("sampled id has a label"))?;
            }
            w.flush()?;
        }
        Command::Predict { graph, sample, method, rank, seed, out } => {
            let g = load_adjacency(&graph)?;
            let s = load_sample(&g, &sample)?;
            let mut rng = seeded_rng(seed);
            let scores = match method {
                PredictMethod::Se => {
                    let cfg = SeConfig { rank: parse_rank(&rank)?, ..SeConfig::default() };
                    let (scores, r) = se_fit(&s, &cfg, &mut rng)?;
                    eprintln!("rank {r}");
                    scores
                }
                PredictMethod::Cur => baselines::cur_estimate(&s)?,
                PredictMethod::Usvt => {
                    baselines::usvt_estimate(&MaskedMatrix::from_ego(&s), baselines::DEFAULT_USVT_THRESHOLD_MULT)?
                }
                PredictMethod::Mc => {
                    let fit = baselines::mc_nuclear_estimate(&MaskedMatrix::from_ego(&s), &McParams::default())?;
                    if !fit.converged {
                        eprintln!("warning: not converged after {} iterations", fit.iterations);
                    }
                    fit.scores
                }
                PredictMethod::Ns => baselines::ns_estimate(&s, baselines::DEFAULT_NS_BANDWIDTH_MULT)?,
            };
            let mut w = output(out.as_deref())?;
            write_matrix_csv(scores.entries(), &mut w)?;
            w.flush()?;
        }
        Command::Evaluate { graph, sample, scores, probability } => {
            let g = load_adjacency(&graph)?;
            let s = load_sample(&g, &sample)?;
            let scores = ScoreMatrix::new(read_matrix_csv(&scores)?)?;
            let p = match probability {
                Some(path) => Some(ProbabilityMatrix::new(read_matrix_csv(&path)?)?),
                None => None,
            };
            let n = g.adjacency.n_nodes();
            if scores.n_nodes() != n || p.as_ref().is_some_and(|p| p.n_nodes() != n) {
                bail!(Error::Spec(format!("matrices must be {n} x {n} to match the graph")));
            }
            let pairs: Vec<(usize, usize)> = unobserved_pairs(&s).collect();
            let eval = evaluate(&scores, &g.adjacency, p.as_ref(), &pairs);
            let show = |v: Option<f64>| v.map_or("undefined".to_owned(), |x| format!("{x:.6}"));
            println!("pairs {} positive {}", eval.n_pairs, eval.n_positive);
            println!("auc {}", show(eval.auc));
            if p.is_some() {
                println!("kendall_tau {}", show(eval.kendall_tau));
            }
        }
        Command::Experiment { spec, out, summary, workers } => {
            let mut spec = ExperimentSpec::from_file(&spec)?;
            if workers.is_some() {
                spec.workers = workers;
            }
            let rows = run_experiment(&spec)?;
            let mut w = output(out.as_deref())?;
            write_results_csv(&rows, &mut w)?;
            w.flush()?;
            if let Some(path) = summary {
                let mut w = output(Some(&path))?;
                write_summary_csv(&summarize(&rows), &mut w)?;
                w.flush()?;
            }
            let failed = rows.iter().filter(|r| r.auc.is_none()).count();
            if failed > 0 {
                eprintln!("{failed} of {} fits produced no AUC; see the note column", rows.len());
            }
        }
        Command::Summarize { results, out } => {
            let file = File::open(&results).map_err(|e| Error::Ingestion {
                path: results.clone(),
                line: 0,
                message: e.to_string(),
            })?;
            let rows = read_results_csv(file)?;
            let mut w = output(out.as_deref())?;
            write_summary_csv(&summarize(&rows), &mut w)?;
            w.flush()?;
        }
        Command::Stats { graph } => {
            let s = load_adjacency(&graph)?.summary();
            println!("nodes {}", s.n_nodes);
            println!("edges {}", s.n_edges);
            println!("average_degree {:.4}", s.average_degree);
            match s.numerical_rank {
                Some(r) => println!("numerical_rank {r:.4}"),
                None => println!("numerical_rank undefined"),
            }
        }
    }
    Ok(())
}

/// 2 for a bad spec or argument, 3 for unreadable input, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Spec(_)) | Some(Error::InvalidArgument(_)) => 2,
        Some(Error::Ingestion { .. }) | Some(Error::Csv(_)) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
