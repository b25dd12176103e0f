//! `roar`: generate workloads, build and search RoarGraph indexes, apply
//! updates, and analyse query distributions.
//!
//! Exit codes: 0 on success, 1 for user errors (bad flags, missing or
//! malformed files, invalid parameters), 2 for internal errors.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "roar", version, about = "Query-guided graph index for out-of-distribution vector search")]
pub struct Cli {
    /// Flat `key = value` file supplying defaults for any flag not given on
    /// the command line.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads; 0 uses every core. With 1, every artifact is
    /// bit-identical across runs.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic shell workload with sunk-in OOD queries.
    Gen(GenArgs),
    /// Compute exact nearest neighbors of queries in a base set.
    Gt(GtArgs),
    /// Build a RoarGraph index from base vectors and construction queries.
    Build(BuildArgs),
    /// Build the query-agnostic comparison graph.
    BuildBaseline(BaselineArgs),
    /// Sweep the search pool size and write recall, QPS, hops per value.
    Search(SearchArgs),
    /// Insert vectors into an existing index.
    Insert(InsertArgs),
    /// Tombstone nodes of an index.
    Delete(DeleteArgs),
    /// Profile how far queries sit from the base distribution.
    Analyze(AnalyzeArgs),
    /// Merge sweep CSVs into a table at fixed recall targets.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pub n_base: usize,
    #[arg(long, default_value_t = 1_000)]
    pub n_query_ood: usize,
    #[arg(long, default_value_t = 1_000)]
    pub n_query_id: usize,
    /// OOD construction queries.
    #[arg(long, default_value_t = 100_000)]
    pub n_train: usize,
    #[arg(long, default_value_t = 32)]
    pub dim: usize,
    #[arg(long, default_value_t = 0.01)]
    pub shell_noise: f32,
    #[arg(long, default_value_t = 0.3)]
    pub ood_depth: f32,
    #[arg(long, default_value_t = 0.08)]
    pub cone_spread: f32,
    #[arg(long, default_value_t = 6)]
    pub intrinsic_dim: usize,
    #[arg(long, default_value_t = 0.005)]
    pub ambient_noise: f32,
}

#[derive(Args, Debug)]
pub struct GtArgs {
    #[arg(long)]
    pub base: PathBuf,
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub k: usize,
    #[arg(long, default_value = "l2")]
    pub metric: String,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[arg(long)]
    pub base: PathBuf,
    /// Construction queries.
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "l2")]
    pub metric: String,
    /// Nearest base neighbors linked from each construction query.
    #[arg(long, default_value_t = 100)]
    pub nq: u32,
    /// Degree limit after projection; enhanced lists may reach twice this.
    #[arg(long, default_value_t = 35)]
    pub m: u32,
    /// Candidate and search pool size used during construction.
    #[arg(long, default_value_t = 500)]
    pub l: u32,
    /// bipartite, projected or enhanced.
    #[arg(long, default_value = "enhanced")]
    pub graph_stage: String,
    /// Use a seeded random subset of `p * n_base` construction queries.
    #[arg(long)]
    pub query_fraction: Option<f64>,
}

#[derive(Args, Debug)]
pub struct BaselineArgs {
    #[arg(long)]
    pub base: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "l2")]
    pub metric: String,
    #[arg(long, default_value_t = 35)]
    pub m: u32,
    #[arg(long, default_value_t = 500)]
    pub l: u32,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub base: PathBuf,
    #[arg(long)]
    pub queries: PathBuf,
    /// Ground truth with at least `k` neighbors per query.
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, value_delimiter = ',', default_value = "10,20,50,100,200")]
    pub l_sweep: Vec<usize>,
    /// Search the bipartite graph stored in the index instead of its
    /// adjacency lists. Needs the construction queries.
    #[arg(long)]
    pub graph_stage: Option<String>,
    /// Construction queries for the bipartite stage; defaults to the file
    /// written next to the index by `build`.
    #[arg(long)]
    pub build_queries: Option<PathBuf>,
    /// Timing repetitions per pool size; the median QPS is reported.
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct InsertArgs {
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub base: PathBuf,
    /// Vectors to insert.
    #[arg(long)]
    pub vectors: PathBuf,
    /// Construction queries; defaults to the file written by `build`.
    #[arg(long)]
    pub queries: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Base vectors including the inserted ones.
    #[arg(long)]
    pub out_base: PathBuf,
}

#[derive(Args, Debug)]
pub struct DeleteArgs {
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub ids: Vec<u32>,
    /// Defaults to rewriting `--index`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub base: PathBuf,
    #[arg(long)]
    pub queries: PathBuf,
    /// Ground truth of the queries; computed when absent.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    #[arg(long, default_value = "l2")]
    pub metric: String,
    /// Neighbors per query for the dispersion profile.
    #[arg(long, default_value_t = 100)]
    pub k: usize,
    /// Base rows used to fit the covariance.
    #[arg(long, default_value_t = 10_000)]
    pub sample: usize,
    /// Points per side of the Wasserstein estimate; 0 skips it.
    #[arg(long, default_value_t = 1_000)]
    pub sinkhorn_sample: usize,
    /// Entropic regularisation; a tenth of the median cost when absent.
    #[arg(long)]
    pub sinkhorn_epsilon: Option<f64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// `label=path` of a sweep CSV; repeat for each curve.
    #[arg(long = "input", required = true)]
    pub inputs: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "0.9,0.95,0.99")]
    pub targets: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let argv: Vec<String> = std::env::args().collect();
    let argv = match config::apply(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| commands::run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(_) => ExitCode::from(2),
    }
}
