use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use log::info;
use serde::Serialize;

use roargraph::analysis::{
    gen_synthetic, mahalanobis_profile, nn_dispersion_profile, nn_distance_profile, wasserstein2_sinkhorn,
    SinkhornParams, SinkhornResult, SyntheticParams,
};
use roargraph::bench::{read_sweep_csv, report, sweep, write_report_csv, write_sweep_csv};
use roargraph::graph::BipartiteSearchGraph;
use roargraph::io::{load_index, read_gt, read_vectors, save_index, write_fbin, write_gt};
use roargraph::oracle::exact_knn_with_threads;
use roargraph::{
    build_baseline_graph, build_stage, delete, BuildParams, DeleteStatus, Inserter, Metric, Stage, VectorSet,
};

use crate::{
    AnalyzeArgs, BaselineArgs, BuildArgs, Cli, Command, DeleteArgs, GenArgs, GtArgs, InsertArgs, ReportArgs,
    SearchArgs,
};

pub fn run(cli: Cli) -> Result<()> {
    let threads = cli.threads;
    let seed = cli.seed;
    match cli.command {
        Command::Gen(a) => gen(a, seed),
        Command::Gt(a) => gt(a, threads),
        Command::Build(a) => build(a, threads, seed),
        Command::BuildBaseline(a) => build_baseline(a, threads),
        Command::Search(a) => search(a, threads),
        Command::Insert(a) => insert(a),
        Command::Delete(a) => delete_ids(a),
        Command::Analyze(a) => analyze(a, threads, seed),
        Command::Report(a) => report_cmd(a),
    }
}

fn metric(s: &str) -> Result<Metric> {
    Ok(s.parse::<Metric>()?)
}

fn load(path: &Path, metric: Metric) -> Result<VectorSet> {
    read_vectors(path, metric).with_context(|| format!("reading vectors from {}", path.display()))
}

/// Where `build` stores the construction queries next to an index.
pub fn queries_sidecar(index: &Path) -> PathBuf {
    let mut s = index.as_os_str().to_owned();
    s.push(".queries.fbin");
    PathBuf::from(s)
}

fn gen(a: GenArgs, seed: u64) -> Result<()> {
    let p = SyntheticParams {
        n_base: a.n_base,
        n_query_ood: a.n_query_ood,
        n_query_id: a.n_query_id,
        n_train_ood: a.n_train,
        dim: a.dim,
        seed,
        shell_noise: a.shell_noise,
        ood_depth: a.ood_depth,
        cone_spread: a.cone_spread,
        intrinsic_dim: a.intrinsic_dim,
        ambient_noise: a.ambient_noise,
    };
    let w = gen_synthetic(&p)?;
    fs::create_dir_all(&a.out_dir)?;
    for (name, set) in [
        ("base.fbin", &w.base),
        ("queries_ood.fbin", &w.ood_queries),
        ("queries_id.fbin", &w.id_queries),
        ("train.fbin", &w.train_queries),
    ] {
        write_fbin(a.out_dir.join(name), set)?;
    }
    info!(
        "wrote {} base, {} OOD, {} ID and {} construction vectors to {}",
        w.base.len(),
        w.ood_queries.len(),
        w.id_queries.len(),
        w.train_queries.len(),
        a.out_dir.display()
    );
    Ok(())
}

fn gt(a: GtArgs, threads: usize) -> Result<()> {
    let m = metric(&a.metric)?;
    let base = load(&a.base, m)?;
    let queries = load(&a.queries, m)?;
    if a.k == 0 || a.k > base.len() {
        bail!("--k must be in 1..={}", base.len());
    }
    let t = Instant::now();
    let truth = exact_knn_with_threads(&base, &queries, a.k, threads)?;
    write_gt(&a.out, &truth)?;
    info!("ground truth for {} queries in {:.1}s", queries.len(), t.elapsed().as_secs_f64());
    Ok(())
}

fn build(a: BuildArgs, threads: usize, seed: u64) -> Result<()> {
    let m = metric(&a.metric)?;
    let stage: Stage = a.graph_stage.parse()?;
    let base = load(&a.base, m)?;
    let mut queries = load(&a.queries, m)?;
    if let Some(p) = a.query_fraction {
        if !(p > 0.0 && p.is_finite()) {
            bail!("--query-fraction must be positive");
        }
        let want = ((p * base.len() as f64).round() as usize).max(1);
        if want > queries.len() {
            log::warn!("query fraction asks for {want} queries but only {} exist", queries.len());
        }
        queries = queries.sample(want, seed);
        info!("using {} construction queries", queries.len());
    }
    let params = BuildParams {
        nq: a.nq,
        max_degree: a.m,
        search_l: a.l,
    };
    let t = Instant::now();
    let (index, bipartite) = build_stage(&base, &queries, params, threads, stage)?;
    info!(
        "built {stage} graph: {} nodes, {} edges, {} reachable from the entry, {:.1}s",
        index.len(),
        index.edge_count(),
        index.reachable_from_medoid(),
        t.elapsed().as_secs_f64()
    );
    save_index(&a.out, &index, Some(&bipartite))?;
    write_fbin(queries_sidecar(&a.out), &queries)?;
    Ok(())
}

fn build_baseline(a: BaselineArgs, threads: usize) -> Result<()> {
    let base = load(&a.base, metric(&a.metric)?)?;
    let t = Instant::now();
    let index = build_baseline_graph(&base, a.m, a.l, threads)?;
    info!(
        "built baseline graph: {} edges, {:.1}s",
        index.edge_count(),
        t.elapsed().as_secs_f64()
    );
    save_index(&a.out, &index, None)?;
    Ok(())
}

fn search(a: SearchArgs, threads: usize) -> Result<()> {
    let (index, bipartite) = load_index(&a.index).with_context(|| format!("loading {}", a.index.display()))?;
    let base = load(&a.base, index.metric())?;
    let queries = load(&a.queries, index.metric())?;
    let truth = read_gt(&a.gt).with_context(|| format!("reading ground truth {}", a.gt.display()))?;
    if base.len() != index.len() {
        bail!("index has {} nodes but base has {} vectors", index.len(), base.len());
    }
    if base.dim() != index.dim() || queries.dim() != index.dim() {
        bail!("index dimension is {}, vectors are {} and {}", index.dim(), base.dim(), queries.dim());
    }
    if a.l_sweep.is_empty() {
        bail!("--l-sweep needs at least one value");
    }
    let stage = a.graph_stage.as_deref().map(str::parse::<Stage>).transpose()?;
    let rows = if stage == Some(Stage::Bipartite) {
        let bip = bipartite.context("index file has no bipartite graph")?;
        let qpath = a.build_queries.clone().unwrap_or_else(|| queries_sidecar(&a.index));
        let build_queries = load(&qpath, index.metric())?;
        let graph = BipartiteSearchGraph::new(&bip, &base, &build_queries, index.medoid())?;
        sweep(&graph, &queries, &truth, a.k, &a.l_sweep, threads, a.reps)?
    } else {
        sweep(&index.graph(&base), &queries, &truth, a.k, &a.l_sweep, threads, a.reps)?
    };
    match &a.out {
        Some(p) => write_sweep_csv(BufWriter::new(File::create(p)?), &rows)?,
        None => write_sweep_csv(std::io::stdout().lock(), &rows)?,
    }
    Ok(())
}

fn insert(a: InsertArgs) -> Result<()> {
    let (mut index, bipartite) = load_index(&a.index)?;
    let mut bip = bipartite.context("insertion needs the bipartite graph saved by `build`")?;
    let mut base = load(&a.base, index.metric())?;
    let qpath = a.queries.clone().unwrap_or_else(|| queries_sidecar(&a.index));
    let queries = load(&qpath, index.metric())?;
    let new = load(&a.vectors, index.metric())?;
    let mut ins = Inserter::new(&bip);
    let mut fallbacks = 0;
    for v in new.rows() {
        let r = ins.insert(&mut index, &mut bip, &mut base, &queries, v)?;
        fallbacks += usize::from(r.fallback);
    }
    info!("inserted {} vectors ({fallbacks} without an anchor)", new.len());
    save_index(&a.out, &index, Some(&bip))?;
    write_fbin(&a.out_base, &base)?;
    if a.queries.is_none() && queries_sidecar(&a.out) != qpath {
        write_fbin(queries_sidecar(&a.out), &queries)?;
    }
    Ok(())
}

fn delete_ids(a: DeleteArgs) -> Result<()> {
    let (mut index, bip) = load_index(&a.index)?;
    let mut deleted = 0;
    for &id in &a.ids {
        if delete(&mut index, id)? == DeleteStatus::Deleted {
            deleted += 1;
        }
    }
    info!("deleted {deleted} of {} ids; {} live nodes", a.ids.len(), index.live_count());
    save_index(a.out.as_ref().unwrap_or(&a.index), &index, bip.as_ref())?;
    Ok(())
}

#[derive(Serialize)]
struct Summary {
    queries: usize,
    base: usize,
    k: usize,
    mahalanobis: Stats,
    nn_distance: Stats,
    dispersion_mean: f64,
    sinkhorn: Option<SinkhornResult>,
}

#[derive(Serialize)]
struct Stats {
    median: f64,
    mean: f64,
    histogram: roargraph::analysis::Histogram,
}

fn analyze(a: AnalyzeArgs, threads: usize, seed: u64) -> Result<()> {
    let m = metric(&a.metric)?;
    let base = load(&a.base, m)?;
    let queries = load(&a.queries, m)?;
    base.check_compatible(&queries)?;
    let truth = match &a.gt {
        Some(p) => read_gt(p)?.truncate(a.k)?,
        None => exact_knn_with_threads(&base, &queries, a.k.min(base.len()), threads)?,
    };
    if truth.len() != queries.len() {
        bail!("ground truth has {} rows for {} queries", truth.len(), queries.len());
    }
    let maha = mahalanobis_profile(&base, &queries, a.sample)?;
    let nn = nn_distance_profile(&truth, m);
    let disp = nn_dispersion_profile(&base, &truth)?;
    let sinkhorn = if a.sinkhorn_sample > 0 {
        let sa = base.sample(a.sinkhorn_sample, seed);
        let sb = queries.sample(a.sinkhorn_sample, seed.wrapping_add(1));
        let params = SinkhornParams {
            epsilon: a.sinkhorn_epsilon,
            ..SinkhornParams::default()
        };
        Some(wasserstein2_sinkhorn(&sa, &sb, params)?)
    } else {
        None
    };

    fs::create_dir_all(&a.out_dir)?;
    let mut w = BufWriter::new(File::create(a.out_dir.join("per_query.csv"))?);
    writeln!(w, "# schema: per-query/1")?;
    writeln!(w, "query,mahalanobis,nn_distance")?;
    for (q, (x, y)) in maha.distances.iter().zip(&nn.distances).enumerate() {
        writeln!(w, "{q},{x},{y}")?;
    }
    w.flush()?;
    let mut w = BufWriter::new(File::create(a.out_dir.join("dispersion.csv"))?);
    writeln!(w, "# schema: dispersion/1")?;
    writeln!(w, "rank,mean_distance")?;
    for (r, d) in disp.iter().enumerate() {
        writeln!(w, "{r},{d}")?;
    }
    w.flush()?;
    let summary = Summary {
        queries: queries.len(),
        base: base.len(),
        k: truth.k(),
        mahalanobis: Stats {
            median: maha.median,
            mean: maha.mean,
            histogram: maha.histogram,
        },
        nn_distance: Stats {
            median: nn.median,
            mean: nn.mean,
            histogram: nn.histogram,
        },
        dispersion_mean: disp.iter().sum::<f64>() / disp.len() as f64,
        sinkhorn,
    };
    let f = File::create(a.out_dir.join("summary.json"))?;
    serde_json::to_writer_pretty(BufWriter::new(f), &summary)?;
    info!(
        "median Mahalanobis {:.3}, median NN distance {:.4}",
        summary.mahalanobis.median, summary.nn_distance.median
    );
    Ok(())
}

fn report_cmd(a: ReportArgs) -> Result<()> {
    let mut sweeps = Vec::new();
    for input in &a.inputs {
        let Some((label, path)) = input.split_once('=') else {
            bail!("--input expects label=path, got {input:?}");
        };
        let f = File::open(path).with_context(|| format!("opening {path}"))?;
        sweeps.push((label.to_string(), read_sweep_csv(f)?));
    }
    let rows = report(&sweeps, &a.targets);
    match &a.out {
        Some(p) => write_report_csv(BufWriter::new(File::create(p)?), &rows)?,
        None => write_report_csv(std::io::stdout().lock(), &rows)?,
    }
    Ok(())
}
