use std::collections::HashSet;
use std::sync::Mutex;

use crate::error::{invalid, Result};
use crate::graph::bipartite::BipartiteGraph;
use crate::graph::prune::{select, sorted_candidates};
use crate::neighbor::Neighbor;
use crate::parallel;
use crate::vectors::VectorSet;

/// Collapses the bipartite graph onto base nodes.
///
/// Every pivot (a base node owning at least one query) gathers candidates
/// from the out-neighbors of its queries, nearest query first, until at
/// least `l` distinct ids are collected. The `l` closest candidates, plus
/// any edges the pivot already received as reverse links, are pruned down
/// to `max_degree` with fulfilling enabled. Each selected neighbor then
/// re-prunes its own list with the pivot added as a candidate.
///
/// Base nodes that are neither pivots nor selected by one keep an empty
/// list. `queries` are the construction queries the bipartite graph was
/// built from; they order a pivot's queries by distance.
pub fn project(
    bipartite: &BipartiteGraph,
    base: &VectorSet,
    queries: &VectorSet,
    max_degree: usize,
    l: usize,
    threads: usize,
) -> Result<Vec<Vec<u32>>> {
    if max_degree < 1 {
        return Err(invalid("degree limit must be at least 1"));
    }
    if bipartite.base_count() != base.len() || bipartite.query_count() != queries.len() {
        return Err(invalid(format!(
            "bipartite graph has {}/{} base/query nodes, vectors have {}/{}",
            bipartite.base_count(),
            bipartite.query_count(),
            base.len(),
            queries.len()
        )));
    }
    base.check_compatible(queries)?;
    let lists: Vec<Mutex<Vec<u32>>> = (0..base.len()).map(|_| Mutex::new(Vec::new())).collect();
    let pivots: Vec<u32> = (0..base.len() as u32)
        .filter(|&x| bipartite.is_pivot(x))
        .collect();
    parallel::for_each_index(threads, pivots.len(), |i| {
        let x = pivots[i];
        let gathered = gather_candidates(bipartite, base, queries, x, l);
        let existing = lists[x as usize].lock().unwrap().clone();
        let mut seen: HashSet<u32> = gathered.iter().copied().collect();
        let ids = gathered
            .into_iter()
            .chain(existing.into_iter().filter(|c| seen.insert(*c)));
        let mut cands = sorted_candidates(base, base.row(x as usize), ids);
        cands.truncate(l);
        let chosen = select(base, &cands, max_degree, true);
        *lists[x as usize].lock().unwrap() = chosen.clone();
        for p in chosen {
            add_reverse(base, &lists, p, x, max_degree);
        }
    });
    Ok(lists.into_iter().map(|m| m.into_inner().unwrap()).collect())
}

/// Out-neighbors of `x`'s queries, nearest query first, deduplicated and
/// excluding `x`, stopping once `l` ids are collected.
pub(crate) fn gather_candidates(
    bipartite: &BipartiteGraph,
    base: &VectorSet,
    queries: &VectorSet,
    x: u32,
    l: usize,
) -> Vec<u32> {
    let xv = base.row(x as usize);
    let mut bridges: Vec<Neighbor> = bipartite
        .base_neighbors(x)
        .iter()
        .map(|&t| Neighbor::new(t, queries.distance_to(t, xv)))
        .collect();
    bridges.sort_unstable();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for b in bridges {
        for &c in bipartite.query_neighbors(b.id) {
            if c != x && seen.insert(c) {
                out.push(c);
            }
        }
        if out.len() >= l {
            break;
        }
    }
    out
}

/// Offers `x` to `p` as a reverse edge: `p`'s list plus `x` is re-pruned
/// without fulfilling.
pub(crate) fn add_reverse(
    base: &VectorSet,
    lists: &[Mutex<Vec<u32>>],
    p: u32,
    x: u32,
    max_degree: usize,
) {
    let mut list = lists[p as usize].lock().unwrap();
    if list.contains(&x) {
        return;
    }
    let cands = sorted_candidates(
        base,
        base.row(p as usize),
        list.iter().copied().chain(std::iter::once(x)),
    );
    *list = select(base, &cands, max_degree, false);
}
