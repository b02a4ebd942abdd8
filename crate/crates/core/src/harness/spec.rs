use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{McParams, DEFAULT_NS_BANDWIDTH_MULT, DEFAULT_USVT_THRESHOLD_MULT};
use crate::error::{Error, Result};
use crate::estimator::{RankChoice, SeConfig};
use crate::generators::ModelFamily;
use crate::linalg::DEFAULT_PINV_REL_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Se,
    Cur,
    Usvt,
    Mc,
    Ns,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Se, Method::Cur, Method::Usvt, Method::Mc, Method::Ns];

    pub fn name(self) -> &'static str {
        match self {
            Method::Se => "se",
            Method::Cur => "cur",
            Method::Usvt => "usvt",
            Method::Mc => "mc",
            Method::Ns => "ns",
        }
    }

    /// Methods that only need a mask, not whole observed rows.
    pub fn supports_iid(self) -> bool {
        matches!(self, Method::Usvt | Method::Mc)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Spec(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Whole rows of `n = round(ρN)` sampled nodes are observed.
    Egocentric,
    /// Each pair is observed independently with probability `ρ`.
    Iid,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Egocentric => "egocentric",
            Regime::Iid => "iid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    #[serde(default = "default_regime")]
    pub regime: Regime,
    pub rho: Vec<f64>,
}

fn default_regime() -> Regime {
    Regime::Egocentric
}

/// Where the networks come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synthetic {
        family: ModelFamily,
        n_nodes: usize,
        degrees: Vec<f64>,
    },
    Dataset {
        name: String,
        path: PathBuf,
    },
}

/// One experiment: a data source, a sampling grid, methods and replication
/// count. Parsed from TOML; see the README for the layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub source: DataSource,
    pub sampling: SamplingSpec,
    pub methods: Vec<Method>,
    pub replications: usize,
    pub base_seed: u64,
    pub se: SeConfig,
    pub usvt_threshold_mult: f64,
    pub mc: McParams,
    pub ns_bandwidth_mult: f64,
    pub workers: Option<usize>,
    /// Record per-fit wall time. Off by default so output is reproducible
    /// byte for byte.
    pub record_timing: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    #[serde(default)]
    model: Option<RawModel>,
    #[serde(default)]
    dataset: Option<RawDataset>,
    sampling: SamplingSpec,
    methods: Vec<Method>,
    #[serde(default = "default_replications")]
    replications: usize,
    #[serde(default)]
    base_seed: u64,
    #[serde(default)]
    se: RawSe,
    #[serde(default)]
    baselines: RawBaselines,
    #[serde(default)]
    workers: Option<usize>,
    #[serde(default)]
    record_timing: bool,
}

fn default_replications() -> usize {
    100
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    family: ModelFamily,
    n_nodes: usize,
    degrees: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    path: PathBuf,
    #[serde(default)]
    name: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawRank {
    Fixed(usize),
    Named(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSe {
    rank: Option<RawRank>,
    cv_holdout_rows: Option<usize>,
    cv_rank_grid: Option<Vec<usize>>,
    pinv_rel_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBaselines {
    usvt_threshold_mult: Option<f64>,
    mc_lambda: Option<f64>,
    mc_tol: Option<f64>,
    mc_max_iter: Option<usize>,
    ns_bandwidth_mult: Option<f64>,
}

impl ExperimentSpec {
    /// Parses and validates a TOML spec. Relative dataset paths resolve
    /// against `base_dir`.
    pub fn from_toml(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        let source = match (raw.model, raw.dataset) {
            (Some(m), None) => DataSource::Synthetic {
                family: m.family,
                n_nodes: m.n_nodes,
                degrees: m.degrees,
            },
            (None, Some(d)) => {
                let path = match base_dir {
                    Some(dir) if d.path.is_relative() => dir.join(&d.path),
                    _ => d.path,
                };
                let name = d.name.unwrap_or_else(|| {
                    path.file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| "dataset".into())
                });
                DataSource::Dataset { name, path }
            }
            _ => return Err(Error::Spec("exactly one of [model] or [dataset] is required".into())),
        };
        let rank = match raw.se.rank {
            None => RankChoice::Auto,
            Some(RawRank::Fixed(r)) => RankChoice::Fixed(r),
            Some(RawRank::Named(s)) if s == "auto" => RankChoice::Auto,
            Some(RawRank::Named(s)) => {
                return Err(Error::Spec(format!("se.rank must be \"auto\" or an integer, got `{s}`")))
            }
        };
        let mc_default = McParams::default();
        let spec = ExperimentSpec {
            source,
            sampling: raw.sampling,
            methods: raw.methods,
            replications: raw.replications,
            base_seed: raw.base_seed,
            se: SeConfig {
                rank,
                cv_holdout_rows: raw.se.cv_holdout_rows,
                cv_rank_grid: raw.se.cv_rank_grid,
                pinv_rel_tol: raw.se.pinv_rel_tol.unwrap_or(DEFAULT_PINV_REL_TOL),
            },
            usvt_threshold_mult: raw
                .baselines
                .usvt_threshold_mult
                .unwrap_or(DEFAULT_USVT_THRESHOLD_MULT),
            mc: McParams {
                lambda: raw.baselines.mc_lambda,
                tol: raw.baselines.mc_tol.unwrap_or(mc_default.tol),
                max_iter: raw.baselines.mc_max_iter.unwrap_or(mc_default.max_iter),
            },
            ns_bandwidth_mult: raw
                .baselines
                .ns_bandwidth_mult
                .unwrap_or(DEFAULT_NS_BANDWIDTH_MULT),
            workers: raw.workers,
            record_timing: raw.record_timing,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Spec(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent())
    }

    /// A synthetic spec with default method settings.
    pub fn synthetic(
        family: ModelFamily,
        n_nodes: usize,
        degrees: Vec<f64>,
        rho: Vec<f64>,
        methods: Vec<Method>,
        replications: usize,
        base_seed: u64,
    ) -> Self {
        ExperimentSpec {
            source: DataSource::Synthetic {
                family,
                n_nodes,
                degrees,
            },
            sampling: SamplingSpec {
                regime: Regime::Egocentric,
                rho,
            },
            methods,
            replications,
            base_seed,
            se: SeConfig::default(),
            usvt_threshold_mult: DEFAULT_USVT_THRESHOLD_MULT,
            mc: McParams::default(),
            ns_bandwidth_mult: DEFAULT_NS_BANDWIDTH_MULT,
            workers: None,
            record_timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Spec(m));
        if self.replications == 0 {
            return fail("replications must be at least 1".into());
        }
        if self.methods.is_empty() {
            return fail("methods must be nonempty".into());
        }
        if self.sampling.rho.is_empty() {
            return fail("sampling.rho must be nonempty".into());
        }
        if let Some(r) = self.sampling.rho.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return fail(format!("sampling rate {r} outside (0, 1)"));
        }
        if self.sampling.regime == Regime::Iid {
            if let Some(m) = self.methods.iter().find(|m| !m.supports_iid()) {
                return fail(format!("method `{m}` needs egocentric samples"));
            }
        }
        if let DataSource::Synthetic {
            n_nodes, degrees, ..
        } = &self.source
        {
            if *n_nodes < 3 {
                return fail("model.n_nodes must be at least 3".into());
            }
            if degrees.is_empty() {
                return fail("model.degrees must be nonempty".into());
            }
            let max = (*n_nodes - 1) as f64;
            if let Some(d) = degrees.iter().find(|d| !(**d > 0.0 && **d <= max)) {
                return fail(format!("degree {d} outside (0, {max}]"));
            }
        }
        if let RankChoice::Fixed(0) = self.se.rank {
            return fail("se.rank must be positive".into());
        }
        if self.workers == Some(0) {
            return fail("workers must be at least 1".into());
        }
        Ok(())
    }

    /// Grid cells as `(degree, rho)`, degree-major. Datasets have no degree.
    pub fn cells(&self) -> Vec<(Option<f64>, f64)> {
        let degrees: Vec<Option<f64>> = match &self.source {
            DataSource::Synthetic { degrees, .. } => degrees.iter().copied().map(Some).collect(),
            DataSource::Dataset { .. } => vec![None],
        };
        degrees
            .iter()
            .flat_map(|&d| self.sampling.rho.iter().map(move |&r| (d, r)))
            .collect()
    }

    pub fn model_name(&self) -> String {
        match &self.source {
            DataSource::Synthetic { family, .. } => family.name().to_owned(),
            DataSource::Dataset { name, .. } => name.clone(),
        }
    }
}
