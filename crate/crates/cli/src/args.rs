use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

/// Kernel-based quadratic distance tests, Poisson kernel-based sampling
/// and spherical clustering.
#[derive(Debug, Parser)]
#[command(name = "quadratik", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Master seed; falls back to QUADRATIK_SEED, then 1.
    #[arg(long, global = true, env = "QUADRATIK_SEED")]
    pub seed: Option<u64>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Directory for plot-ready CSV tables.
    #[arg(long, global = true)]
    pub aux_dir: Option<PathBuf>,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Send the request to a running quadratik-server.
    #[arg(long, global = true)]
    pub server: Option<String>,
    /// Output format; pkbd-sample defaults to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Input {
    /// Numeric CSV table, one observation per row.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub has_header: bool,
    /// comma, tab, semicolon, space, pipe or a single character.
    #[arg(long, default_value = "comma")]
    pub delim: String,
    /// 1-based column of --data holding integer group labels.
    #[arg(long, conflicts_with = "labels")]
    pub labels_col: Option<usize>,
    /// File with one integer label per row (same delimiter and header rule).
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Plan {
    /// subsampling, bootstrap or permutation.
    #[arg(long)]
    pub method: Option<String>,
    /// Subsample fraction.
    #[arg(long = "b")]
    pub fraction: Option<f64>,
    /// Number of replicates.
    #[arg(long = "B")]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub quantile: Option<f64>,
}

#[derive(Debug, Args)]
pub struct Fitting {
    /// Cluster counts, e.g. `2-10` or `2,4,6`.
    #[arg(long, value_parser = parse_counts)]
    pub k: Option<Counts>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// max, membership or loglik.
    #[arg(long)]
    pub stopping_rule: Option<String>,
    #[arg(long)]
    pub num_init: Option<usize>,
    #[arg(long)]
    pub loglik_tol: Option<f64>,
    /// Fit the rows as given instead of rescaling them to unit length.
    #[arg(long)]
    pub no_normalize: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test multivariate normality.
    NormalTest {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        h: f64,
        /// Reference mean, comma separated.
        #[arg(long, value_parser = parse_list)]
        mu: Option<List>,
        /// Reference covariance, rows separated by `;`.
        #[arg(long, value_parser = parse_matrix)]
        sigma: Option<Rows>,
        /// param or nonparam.
        #[arg(long)]
        centering: Option<String>,
        #[arg(long = "B")]
        replicates: Option<usize>,
        #[arg(long)]
        quantile: Option<f64>,
    },
    /// Test equality of two distributions (--y, or two-group labels).
    TwosampleTest {
        #[command(flatten)]
        input: Input,
        /// Second sample.
        #[arg(long)]
        y: Option<PathBuf>,
        #[arg(long)]
        h: f64,
        #[command(flatten)]
        plan: Plan,
    },
    /// Test equality of k distributions given group labels.
    KsampleTest {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        h: f64,
        #[command(flatten)]
        plan: Plan,
    },
    /// Test uniformity on the sphere.
    UniformityTest {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        rho: f64,
        #[arg(long = "B")]
        replicates: Option<usize>,
        #[arg(long)]
        quantile: Option<f64>,
    },
    /// Choose the k-sample bandwidth by simulated power.
    SelectH {
        #[command(flatten)]
        input: Input,
        /// location, scale or skewness.
        #[arg(long)]
        alternative: String,
        #[arg(long, value_parser = parse_list)]
        deltas: Option<List>,
        #[arg(long, value_parser = parse_list)]
        h_grid: Option<List>,
        #[arg(long)]
        n_runs: Option<usize>,
        #[command(flatten)]
        plan: Plan,
    },
    /// Draw from a Poisson kernel-based distribution.
    PkbdSample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rho: f64,
        /// Mean direction, comma separated.
        #[arg(long, value_parser = parse_list)]
        mu: List,
        /// rejvmf or rejacg.
        #[arg(long)]
        method: Option<String>,
    },
    /// Evaluate a Poisson kernel-based density at the rows of --data.
    PkbdDensity {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        rho: f64,
        #[arg(long, value_parser = parse_list)]
        mu: List,
    },
    /// Fit mixtures of Poisson kernel-based densities.
    Cluster {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        cluster: Fitting,
    },
    /// Validate fitted mixtures: k-sample tests, IGP, metrics and elbow.
    Validate {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        cluster: Fitting,
        /// Output of `cluster` to validate instead of refitting.
        #[arg(long)]
        fits: Option<PathBuf>,
        /// Bandwidth of the k-sample tests.
        #[arg(long)]
        h: Option<f64>,
        #[command(flatten)]
        plan: Plan,
    },
    /// Per-cluster statistics and display coordinates of one fit.
    Summary {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        cluster: Fitting,
        #[arg(long)]
        fits: Option<PathBuf>,
        /// Number of clusters of the fit to summarize.
        #[arg(long)]
        num_clust: usize,
    },
}

// Newtypes keep clap from reading these as repeated flags.
#[derive(Debug, Clone, PartialEq)]
pub struct List(pub Vec<f64>);
#[derive(Debug, Clone, PartialEq)]
pub struct Rows(pub Vec<Vec<f64>>);
#[derive(Debug, Clone, PartialEq)]
pub struct Counts(pub Vec<usize>);

fn numbers(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| format!("{t:?} is not a number"))).collect()
}

fn parse_list(s: &str) -> Result<List, String> {
    numbers(s).map(List)
}

fn parse_matrix(s: &str) -> Result<Rows, String> {
    s.split(';').map(numbers).collect::<Result<_, _>>().map(Rows)
}

fn parse_counts(s: &str) -> Result<Counts, String> {
    let bad = |t: &str| format!("{t:?} is not a cluster count");
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.parse().map_err(|_| bad(part))?, b.parse().map_err(|_| bad(part))?);
                if a > b {
                    return Err(bad(part));
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad(part))?),
        }
    }
    Ok(Counts(out))
}

/// Request fields given on the command line; omitted ones take the
/// library defaults when the request is decoded.
pub struct Fields(pub Map<String, Value>);

impl Fields {
    pub fn new(operation: &str) -> Self {
        let mut m = Map::new();
        m.insert("operation".into(), operation.into());
        Self(m)
    }

    pub fn put<T: Into<Value>>(&mut self, key: &str, v: Option<T>) -> &mut Self {
        if let Some(v) = v {
            self.0.insert(key.into(), v.into());
        }
        self
    }

    pub fn plan(&mut self, p: &Plan) -> &mut Self {
        self.put("method", p.method.clone())
            .put("fraction", p.fraction)
            .put("replicates", p.replicates)
            .put("quantile", p.quantile)
    }

    pub fn cluster(&mut self, c: &Fitting) -> &mut Self {
        self.put("k", c.k.clone().map(|k| k.0))
            .put("max_iter", c.max_iter)
            .put("stopping_rule", c.stopping_rule.clone())
            .put("num_init", c.num_init)
            .put("loglik_tol", c.loglik_tol)
            .put("normalize", c.no_normalize.then_some(false))
    }
}
