//! Run configuration: a TOML file whose values individual flags override.
//!
//! Every setting is optional in both places; unset values fall back to the
//! defaults of the command being run.
//!
//! ```toml
//! seeds = 4
//! out_dir = "demo"
//!
//! [synth]
//! n_clusters = 4
//!
//! [train]
//! epochs = 200
//! lr = 0.005
//! ```

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use sagvic::graphspec::GraphConfig;
use sagvic::hierclust::{LcaMode, LinkageKind};
use sagvic::sagvicreg::{SynthConfig, TrainConfig, Variant, VicregConfig};
use sagvic::structmetrics::SimilarityConfig;
use sagvic::Metric;

use crate::error::{CliError, CliResult};
use crate::io::read_text;

/// Field-wise `a.or(b)` over structs of options.
macro_rules! overlay {
    ($a:expr, $b:expr; $($f:ident),+ $(,)?) => {{
        let (a, b) = ($a, $b);
        Self { $($f: a.$f.or(b.$f)),+ }
    }};
}

/// Assigns every set option onto the matching field of `target`.
macro_rules! apply {
    ($src:expr, $target:expr; $($f:ident),+ $(,)?) => {
        $(if let Some(v) = $src.$f.clone() { $target.$f = v; })+
    };
}

#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VicregArgs {
    #[arg(long)]
    pub lambda_inv: Option<f64>,
    #[arg(long)]
    pub mu_var: Option<f64>,
    #[arg(long)]
    pub nu_cov: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Neighbours per row of the batch affinity.
    #[arg(long)]
    pub k_neighbors: Option<usize>,
    #[arg(long)]
    pub scale_percentile: Option<f64>,
    #[arg(long)]
    pub scale_floor: Option<f64>,
}

impl VicregArgs {
    /// Values set here win over `file`.
    pub fn over(self, file: Self) -> Self {
        overlay!(self, file; lambda_inv, mu_var, nu_cov, gamma, epsilon, k_neighbors, scale_percentile, scale_floor)
    }

    pub fn resolve(&self, mut base: VicregConfig) -> CliResult<VicregConfig> {
        apply!(self, base; lambda_inv, mu_var, nu_cov, gamma, epsilon, k_neighbors, scale_percentile, scale_floor);
        base.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(base)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthArgs {
    #[arg(long)]
    pub n_clusters: Option<usize>,
    #[arg(long)]
    pub points_per_cluster: Option<usize>,
    #[arg(long)]
    pub ambient_dim: Option<usize>,
    #[arg(long)]
    pub center_spread: Option<f64>,
    #[arg(long)]
    pub cluster_std: Option<f64>,
    #[arg(long)]
    pub augment_std: Option<f64>,
}

impl SynthArgs {
    /// Values set here win over `file`.
    pub fn over(self, file: Self) -> Self {
        overlay!(self, file; n_clusters, points_per_cluster, ambient_dim, center_spread, cluster_std, augment_std)
    }

    pub fn resolve(&self, mut base: SynthConfig) -> CliResult<SynthConfig> {
        apply!(self, base; n_clusters, points_per_cluster, ambient_dim, center_spread, cluster_std, augment_std);
        base.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(base)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainArgs {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
}

impl TrainArgs {
    /// Values set here win over `file`.
    pub fn over(self, file: Self) -> Self {
        overlay!(self, file; epochs, batch_size, lr)
    }

    pub fn resolve(&self, mut base: TrainConfig) -> CliResult<TrainConfig> {
        apply!(self, base; epochs, batch_size, lr);
        base.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(base)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimilarityArgs {
    /// ward, average, complete or single.
    #[arg(long)]
    pub linkage: Option<LinkageKind>,
    /// cosine or euclidean.
    #[arg(long)]
    pub metric: Option<Metric>,
    /// hops or height.
    #[arg(long)]
    pub lca_mode: Option<LcaMode>,
    /// Correlate a seeded random subset of at most this many pairs.
    #[arg(long)]
    pub max_pairs: Option<usize>,
}

impl SimilarityArgs {
    /// Values set here win over `file`.
    pub fn over(self, file: Self) -> Self {
        overlay!(self, file; linkage, metric, lca_mode, max_pairs)
    }

    pub fn resolve(&self, seed: u64) -> SimilarityConfig {
        let mut cfg = SimilarityConfig {
            seed,
            ..SimilarityConfig::default()
        };
        apply!(self, cfg; linkage, metric, lca_mode);
        if self.max_pairs.is_some() {
            cfg.max_pairs = self.max_pairs;
        }
        cfg
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphArgs {
    /// Neighbours per point of the clustering graph.
    #[arg(long)]
    pub graph_neighbors: Option<usize>,
    /// Distance behind the clustering graph.
    #[arg(long)]
    pub graph_metric: Option<Metric>,
}

impl GraphArgs {
    /// Values set here win over `file`.
    pub fn over(self, file: Self) -> Self {
        overlay!(self, file; graph_neighbors, graph_metric)
    }

    pub fn resolve(&self) -> CliResult<GraphConfig> {
        let mut cfg = GraphConfig::default();
        if let Some(k) = self.graph_neighbors {
            if k == 0 {
                return Err(CliError::Usage("graph-neighbors must be at least 1".into()));
            }
            cfg.k_neighbors = k;
        }
        if let Some(m) = self.graph_metric {
            cfg.metric = m;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentArgs {
    /// Number of seeds, run as `seed, seed+1, ...`.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Comma-separated cluster ids used for training.
    #[arg(long, value_delimiter = ',')]
    pub train_clusters: Option<Vec<usize>>,
    /// Fresh evaluation points per cluster.
    #[arg(long)]
    pub test_points: Option<usize>,
}

impl ExperimentArgs {
    /// Values set here win over `file`.
    pub fn over(self, file: Self) -> Self {
        overlay!(self, file; seeds, train_clusters, test_points)
    }
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub variant: Option<Variant>,
    pub seeds: Option<usize>,
    pub train_clusters: Option<Vec<usize>>,
    pub test_points: Option<usize>,
    pub out: Option<PathBuf>,
    pub history: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub sweep_out: Option<PathBuf>,
    pub vicreg: VicregArgs,
    pub synth: SynthArgs,
    pub train: TrainArgs,
    pub similarity: SimilarityArgs,
    pub graph: GraphArgs,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> CliResult<RunConfig> {
        RunConfig::parse(&read_text(path)?).map_err(|e| CliError::format(path, e))
    }

    pub fn load_opt(path: Option<&Path>) -> CliResult<RunConfig> {
        path.map_or_else(|| Ok(RunConfig::default()), RunConfig::load)
    }

    pub fn experiment(&self) -> ExperimentArgs {
        ExperimentArgs {
            seeds: self.seeds,
            train_clusters: self.train_clusters.clone(),
            test_points: self.test_points,
        }
    }
}
