//! Offline insertion through the saved bipartite graph, and tombstone
//! deletion.
//!
//! Updates need exclusive access to the index, the bipartite graph and the
//! base vectors; nothing here synchronises with concurrent searches.

use log::warn;

use crate::error::{Error, Result};
use crate::graph::{select, sorted_candidates, BipartiteGraph, RoarIndex};
use crate::neighbor::Neighbor;
use crate::search::{AdjacencyGraph, Searcher};
use crate::vectors::VectorSet;

/// Outcome of one insertion.
#[derive(Debug, Clone, PartialEq)]
pub struct InsertReport {
    pub id: u32,
    /// Base node the new vector was attached through; `None` on fallback.
    pub anchor: Option<u32>,
    /// Query node whose out-neighbors supplied the candidates.
    pub query: Option<u32>,
    /// No pool entry had a query in-edge, so the new vector was linked to
    /// its search pool directly.
    pub fallback: bool,
    pub neighbors: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeleteStatus {
    Deleted,
    AlreadyDeleted,
}

/// Insertion state that survives across calls: the reverse of the
/// query-to-base edges, so anchor eligibility is a constant-time check.
pub struct Inserter {
    query_in: Vec<Vec<u32>>,
    searcher: Searcher,
}

impl Inserter {
    pub fn new(bipartite: &BipartiteGraph) -> Self {
        let mut query_in = vec![Vec::new(); bipartite.base_count()];
        for (t, list) in bipartite.query_adjacency().iter().enumerate() {
            for &b in list {
                query_in[b as usize].push(t as u32);
            }
        }
        Self {
            query_in,
            searcher: Searcher::new(bipartite.base_count()),
        }
    }

    /// Appends `v` to `base` and links it into `index`.
    ///
    /// The index is searched with `v` (pool capacity taken from the index's
    /// build parameters). The nearest pool entry that some query links to is
    /// the anchor, and the anchor's query nearest to `v` supplies the
    /// candidate neighbors. `v` keeps up to `M` of them (fulfilling) and
    /// each is offered a reverse edge: its list plus `v` is re-selected with
    /// fulfilling at the `2M` cap, so an existing edge is only dropped when
    /// the list is full. The query then gains `v` as an out-neighbor.
    pub fn insert(
        &mut self,
        index: &mut RoarIndex,
        bipartite: &mut BipartiteGraph,
        base: &mut VectorSet,
        queries: &VectorSet,
        v: &[f32],
    ) -> Result<InsertReport> {
        if base.len() != index.len() || bipartite.base_count() != index.len() {
            return Err(crate::error::invalid(format!(
                "index has {} nodes, base {} vectors, bipartite graph {} base nodes",
                index.len(),
                base.len(),
                bipartite.base_count()
            )));
        }
        if bipartite.query_count() != queries.len() {
            return Err(crate::error::invalid(format!(
                "bipartite graph has {} queries but {} query vectors were given",
                bipartite.query_count(),
                queries.len()
            )));
        }
        base.check_compatible(queries)?;
        base.check_query(v)?;
        let m = index.params.max_degree as usize;
        let cap = index.params.degree_cap();
        let l = (index.params.search_l as usize).max(1);
        let id = base.push(v)?;
        // the stored (possibly normalised) copy
        let vv = base.row(id as usize).to_vec();

        let pool = if index.is_empty() {
            Vec::new()
        } else {
            let graph = AdjacencyGraph {
                adjacency: &index.adjacency,
                base,
                entry: index.medoid,
                tombstones: Some(&index.tombstones),
            };
            self.searcher.pool_for(&graph, &vv, l)
        };
        let anchor = pool.iter().find(|n| !self.query_in[n.id as usize].is_empty());

        let (cands, anchor, query) = match anchor {
            Some(a) => {
                let q = self.query_in[a.id as usize]
                    .iter()
                    .map(|&t| Neighbor::new(t, queries.distance_to(t, &vv)))
                    .min()
                    .expect("anchor has a query")
                    .id;
                let ids = bipartite.query_neighbors(q).to_vec();
                (sorted_candidates(base, &vv, ids), Some(a.id), Some(q))
            }
            None => (pool, None, None),
        };
        let fallback = anchor.is_none();
        if fallback {
            warn!("insert {id}: no anchor with a query in-edge, linking to the search pool");
        }
        let neighbors = select(base, &cands, m, true);

        index.adjacency.push(neighbors.clone());
        index.tombstones.push(false);
        for &p in &neighbors {
            let list = &index.adjacency[p as usize];
            let c = sorted_candidates(
                base,
                base.row(p as usize),
                list.iter().copied().chain(std::iter::once(id)),
            );
            index.adjacency[p as usize] = select(base, &c, cap, true);
        }
        bipartite.push_base();
        self.query_in.push(Vec::new());
        if let Some(q) = query {
            bipartite.push_query_neighbor(q, id);
            self.query_in[id as usize].push(q);
        }
        Ok(InsertReport {
            id,
            anchor,
            query,
            fallback,
            neighbors,
        })
    }
}

/// Inserts one vector; see [`Inserter::insert`]. For many insertions reuse
/// an [`Inserter`].
pub fn insert(
    index: &mut RoarIndex,
    bipartite: &mut BipartiteGraph,
    base: &mut VectorSet,
    queries: &VectorSet,
    v: &[f32],
) -> Result<InsertReport> {
    Inserter::new(bipartite).insert(index, bipartite, base, queries, v)
}

/// Marks `id` deleted. Its edges stay in place so searches still route
/// through it, but it is never returned as a result.
pub fn delete(index: &mut RoarIndex, id: u32) -> Result<DeleteStatus> {
    let n = index.len();
    let slot = index.tombstones.get_mut(id as usize).ok_or(Error::IdOutOfRange {
        id: u64::from(id),
        bound: n as u64,
    })?;
    if *slot {
        warn!("node {id} is already deleted");
        return Ok(DeleteStatus::AlreadyDeleted);
    }
    *slot = true;
    Ok(DeleteStatus::Deleted)
}
