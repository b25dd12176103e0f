use std::collections::BinaryHeap;
use std::sync::Mutex;

use log::info;

use crate::error::{invalid, Result};
use crate::graph::bipartite::BipartiteGraph;
use crate::graph::enhance::{enhance_connectivity, repair_reachability};
use crate::graph::index::{BuildParams, RoarIndex};
use crate::graph::projection::{add_reverse, project};
use crate::graph::prune::{select, sorted_candidates};
use crate::oracle::{exact_knn_with_threads, nearest};
use crate::parallel;
use crate::truth::GroundTruth;
use crate::neighbor::Neighbor;
use crate::vectors::{centroid, medoid, VectorSet};

/// How far construction proceeds. Earlier stages are kept searchable for
/// ablation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    /// Stop after the bipartite graph; the returned index has no edges.
    Bipartite,
    /// Stop after projection.
    Projected,
    /// Full construction including connectivity enhancement.
    Enhanced,
}

impl std::str::FromStr for Stage {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bipartite" => Ok(Stage::Bipartite),
            "projected" => Ok(Stage::Projected),
            "enhanced" => Ok(Stage::Enhanced),
            other => Err(invalid(format!("unknown graph stage {other:?}"))),
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Bipartite => "bipartite",
            Stage::Projected => "projected",
            Stage::Enhanced => "enhanced",
        })
    }
}

/// Builds a full RoarGraph index from base data and construction queries.
pub fn build_roargraph(
    base: &VectorSet,
    queries: &VectorSet,
    params: BuildParams,
    threads: usize,
) -> Result<(RoarIndex, BipartiteGraph)> {
    build_stage(base, queries, params, threads, Stage::Enhanced)
}

/// Builds up to `stage`, computing the construction ground truth exactly.
pub fn build_stage(
    base: &VectorSet,
    queries: &VectorSet,
    params: BuildParams,
    threads: usize,
    stage: Stage,
) -> Result<(RoarIndex, BipartiteGraph)> {
    params.validate()?;
    base.check_compatible(queries)?;
    if base.is_empty() {
        return Err(crate::Error::EmptySet);
    }
    if queries.is_empty() {
        return Err(invalid("at least one construction query is required"));
    }
    if base.len() == 1 {
        let bipartite =
            BipartiteGraph::from_parts(vec![Vec::new(); queries.len()], vec![(0..queries.len() as u32).collect()])?;
        let index = RoarIndex::from_parts(base.metric(), base.dim(), vec![Vec::new()], 0, params, vec![false])?;
        return Ok((index, bipartite));
    }
    let nq = (params.nq as usize).min(base.len());
    info!("computing {nq} nearest neighbors for {} construction queries", queries.len());
    let truth = exact_knn_with_threads(base, queries, nq, threads)?;
    build_from_truth(base, queries, &truth, params, threads, stage)
}

/// Builds up to `stage` from a precomputed construction ground truth whose
/// `k` is used as the bipartite fan-out.
pub fn build_from_truth(
    base: &VectorSet,
    queries: &VectorSet,
    truth: &GroundTruth,
    params: BuildParams,
    threads: usize,
    stage: Stage,
) -> Result<(RoarIndex, BipartiteGraph)> {
    params.validate()?;
    base.check_compatible(queries)?;
    if truth.len() != queries.len() {
        return Err(invalid(format!(
            "ground truth has {} rows for {} queries",
            truth.len(),
            queries.len()
        )));
    }
    let m = params.max_degree as usize;
    let l = params.search_l as usize;
    let bipartite = BipartiteGraph::build(base.len(), truth)?;
    let mut adjacency = vec![Vec::new(); base.len()];
    let entry = if stage == Stage::Bipartite {
        entry_point(base, bipartite.base_adjacency())?
    } else {
        info!("projecting bipartite graph (M={m}, L={l})");
        adjacency = project(&bipartite, base, queries, m, l, threads)?;
        entry_point(base, &adjacency)?
    };
    if stage == Stage::Enhanced {
        info!("enhancing connectivity");
        adjacency = enhance_connectivity(&adjacency, base, entry, m, l, threads)?;
        let added = repair_reachability(&mut adjacency, base, entry, 2 * m, l);
        info!("reachability repair added {added} edges");
    }
    let index = RoarIndex::from_parts(
        base.metric(),
        base.dim(),
        adjacency,
        entry,
        params,
        vec![false; base.len()],
    )?;
    Ok((index, bipartite))
}

/// The base vector nearest the centroid among nodes with at least one
/// out-edge in `lists`; the plain medoid when no node has edges. A
/// projected graph leaves most non-pivot nodes without out-edges, and a
/// search entered at such a node cannot move.
pub(crate) fn entry_point(base: &VectorSet, lists: &[Vec<u32>]) -> Result<u32> {
    let c: Vec<f32> = centroid(base)?.into_iter().map(|x| x as f32).collect();
    let best = (0..base.len() as u32)
        .filter(|&i| !lists[i as usize].is_empty())
        .map(|i| Neighbor::new(i, base.distance_to(i, &c)))
        .min();
    match best {
        Some(n) => Ok(n.id),
        None => medoid(base),
    }
}

/// A query-agnostic comparison graph: every node prunes its exact `L`
/// nearest base neighbors with the same selection rule used by projection
/// (fulfilling enabled), reverse edges are offered, and the same
/// connectivity enhancement pass follows. The stored `nq` is zero.
pub fn build_baseline_graph(
    base: &VectorSet,
    max_degree: u32,
    l: u32,
    threads: usize,
) -> Result<RoarIndex> {
    if max_degree < 1 || l < 1 {
        return Err(invalid("baseline needs M >= 1 and L >= 1"));
    }
    if base.is_empty() {
        return Err(crate::Error::EmptySet);
    }
    let m = max_degree as usize;
    let l = l as usize;
    info!("baseline: scanning {l} exact neighbors per node");
    let lists: Vec<Mutex<Vec<u32>>> = (0..base.len()).map(|_| Mutex::new(Vec::new())).collect();
    parallel::for_each_index_init(threads, base.len(), || BinaryHeap::with_capacity(l + 1), |scratch, i| {
        let x = i as u32;
        let xv = base.row(i);
        let knn = nearest(base, xv, l, Some(x), scratch);
        let existing = lists[i].lock().unwrap().clone();
        let extra = existing.into_iter().filter(|e| !knn.iter().any(|n| n.id == *e));
        let cands = sorted_candidates(base, xv, knn.iter().map(|n| n.id).chain(extra));
        let chosen = select(base, &cands, m, true);
        *lists[i].lock().unwrap() = chosen.clone();
        for p in chosen {
            add_reverse(base, &lists, p, x, m);
        }
    });
    let adjacency: Vec<Vec<u32>> = lists.into_iter().map(|m| m.into_inner().unwrap()).collect();
    let entry = medoid(base)?;
    info!("baseline: enhancing connectivity");
    let mut adjacency = enhance_connectivity(&adjacency, base, entry, m, l, threads)?;
    let added = repair_reachability(&mut adjacency, base, entry, 2 * m, l);
    info!("baseline: reachability repair added {added} edges");
    RoarIndex::from_parts(
        base.metric(),
        base.dim(),
        adjacency,
        entry,
        BuildParams {
            nq: 0,
            max_degree,
            search_l: l as u32,
        },
        vec![false; base.len()],
    )
}
