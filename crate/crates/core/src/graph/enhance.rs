use std::collections::HashSet;
use std::sync::Mutex;

use crate::error::{invalid, Result};
use crate::graph::projection::add_reverse;
use crate::graph::prune::select;
use crate::neighbor::Neighbor;
use crate::parallel;
use crate::search::{AdjacencyGraph, Searcher};
use crate::vectors::VectorSet;

/// Adds supplementary edges found by searching the graph itself.
///
/// Every base vector is used as a query against a frozen copy of `graph`
/// (entry at `medoid`, pool capacity `l`). The converged pool, minus the
/// node itself, is pruned to `max_degree` without fulfilling, and each kept
/// neighbor is offered a reverse edge. The supplementary lists are then
/// merged into `graph`: original edges first, then new ones, with the
/// farthest new edges dropped if a list would exceed `2 * max_degree`.
pub fn enhance_connectivity(
    graph: &[Vec<u32>],
    base: &VectorSet,
    medoid: u32,
    max_degree: usize,
    l: usize,
    threads: usize,
) -> Result<Vec<Vec<u32>>> {
    if max_degree < 1 {
        return Err(invalid("degree limit must be at least 1"));
    }
    if graph.len() != base.len() {
        return Err(invalid(format!(
            "graph has {} nodes but base has {} vectors",
            graph.len(),
            base.len()
        )));
    }
    if graph.is_empty() {
        return Ok(Vec::new());
    }
    let frozen = AdjacencyGraph {
        adjacency: graph,
        base,
        entry: medoid,
        tombstones: None,
    };
    let extra: Vec<Mutex<Vec<u32>>> = graph.iter().map(|l| Mutex::new(l.clone())).collect();
    parallel::for_each_index_init(threads, graph.len(), || Searcher::new(graph.len()), |searcher, i| {
        let x = i as u32;
        let xv = base.row(i);
        let pool = searcher.pool_for(&frozen, xv, l);
        let existing = extra[i].lock().unwrap().clone();
        let cands = merge_candidates(base, xv, x, pool, &existing);
        let chosen = select(base, &cands, max_degree, false);
        *extra[i].lock().unwrap() = chosen.clone();
        for p in chosen {
            add_reverse(base, &extra, p, x, max_degree);
        }
    });
    let cap = 2 * max_degree;
    Ok(graph
        .iter()
        .zip(extra)
        .enumerate()
        .map(|(x, (orig, extra))| merge_lists(base, x as u32, orig, &extra.into_inner().unwrap(), cap))
        .collect())
}

/// Links every node not reachable from `entry` to the graph.
///
/// Nodes are visited in id order. For an unreachable node `u`, the graph is
/// searched from `entry` with `u`'s vector and pool capacity `l`; the
/// nearest pool node with spare capacity (fewer than `cap` out-edges) gains
/// an edge to `u`, and everything newly reachable through `u` is marked.
/// Returns the number of edges added. A node whose pool has no spare
/// capacity stays unreachable.
pub fn repair_reachability(
    adjacency: &mut [Vec<u32>],
    base: &VectorSet,
    entry: u32,
    cap: usize,
    l: usize,
) -> usize {
    let n = adjacency.len();
    if n == 0 {
        return 0;
    }
    let mut reached = vec![false; n];
    let mut stack = vec![entry];
    reached[entry as usize] = true;
    mark_from(adjacency, &mut reached, &mut stack);
    let mut searcher = Searcher::new(n);
    let mut added = 0;
    for u in 0..n {
        if reached[u] {
            continue;
        }
        let graph = AdjacencyGraph {
            adjacency,
            base,
            entry,
            tombstones: None,
        };
        let pool = searcher.pool_for(&graph, base.row(u), l);
        let Some(p) = pool
            .iter()
            .map(|nb| nb.id)
            .find(|&p| p as usize != u && adjacency[p as usize].len() < cap)
        else {
            continue;
        };
        adjacency[p as usize].push(u as u32);
        added += 1;
        reached[u] = true;
        stack.push(u as u32);
        mark_from(adjacency, &mut reached, &mut stack);
    }
    added
}

fn mark_from(adjacency: &[Vec<u32>], reached: &mut [bool], stack: &mut Vec<u32>) {
    while let Some(v) = stack.pop() {
        for &w in &adjacency[v as usize] {
            if !reached[w as usize] {
                reached[w as usize] = true;
                stack.push(w);
            }
        }
    }
}

/// Search pool minus `x`, plus `x`'s current supplementary list, sorted.
fn merge_candidates(
    base: &VectorSet,
    xv: &[f32],
    x: u32,
    pool: Vec<Neighbor>,
    existing: &[u32],
) -> Vec<Neighbor> {
    let mut seen: HashSet<u32> = pool.iter().map(|n| n.id).collect();
    let mut cands: Vec<Neighbor> = pool.into_iter().filter(|n| n.id != x).collect();
    for &e in existing {
        if e != x && seen.insert(e) {
            cands.push(Neighbor::new(e, base.distance_to(e, xv)));
        }
    }
    cands.sort_unstable();
    cands
}

/// `orig` followed by the entries of `extra` it lacks, keeping at most `cap`
/// entries; overflow drops the farthest entries from the `extra` side.
pub(crate) fn merge_lists(base: &VectorSet, x: u32, orig: &[u32], extra: &[u32], cap: usize) -> Vec<u32> {
    let mut out = orig.to_vec();
    let added: Vec<u32> = extra.iter().copied().filter(|e| !orig.contains(e)).collect();
    let room = cap.saturating_sub(out.len());
    if added.len() <= room {
        out.extend(added);
    } else {
        let xv = base.row(x as usize);
        let mut ranked: Vec<Neighbor> = added
            .iter()
            .map(|&e| Neighbor::new(e, base.distance_to(e, xv)))
            .collect();
        ranked.sort_unstable();
        let keep: HashSet<u32> = ranked.iter().take(room).map(|n| n.id).collect();
        out.extend(added.into_iter().filter(|e| keep.contains(e)));
    }
    out
}
