//! Best-first beam search with a bounded candidate pool.
//!
//! The pool holds at most `L` entries ordered by distance (ties by id).
//! Starting from the graph's entry node, the search repeatedly expands the
//! closest entry that has not been expanded yet, scores its unseen
//! out-neighbors, and inserts those that beat the current worst entry (or
//! any, while the pool is not full). It stops once every pool entry has
//! been expanded.

use std::time::Instant;

use crate::error::{invalid, Error, Result};
use crate::graph::RoarIndex;
use crate::neighbor::Neighbor;
use crate::oracle::recall_at_k;
use crate::parallel;
use crate::truth::GroundTruth;
use crate::vectors::VectorSet;

/// A graph that beam search can walk.
pub trait SearchGraph {
    fn node_count(&self) -> usize;
    fn entry(&self) -> u32;
    fn neighbors(&self, id: u32) -> &[u32];
    fn distance(&self, id: u32, query: &[f32]) -> f32;
    fn dim(&self) -> usize;

    /// Whether a node may appear in results. Nodes that are not eligible
    /// (deleted base nodes, query nodes of a bipartite graph) still route.
    fn is_result(&self, _id: u32) -> bool {
        true
    }
}

/// A plain adjacency list over base vectors, optionally with tombstones.
#[derive(Clone, Copy)]
pub struct AdjacencyGraph<'a> {
    pub adjacency: &'a [Vec<u32>],
    pub base: &'a VectorSet,
    pub entry: u32,
    pub tombstones: Option<&'a [bool]>,
}

impl SearchGraph for AdjacencyGraph<'_> {
    #[inline]
    fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    #[inline]
    fn entry(&self) -> u32 {
        self.entry
    }

    #[inline]
    fn neighbors(&self, id: u32) -> &[u32] {
        &self.adjacency[id as usize]
    }

    #[inline]
    fn distance(&self, id: u32, query: &[f32]) -> f32 {
        self.base.distance_to(id, query)
    }

    fn dim(&self) -> usize {
        self.base.dim()
    }

    #[inline]
    fn is_result(&self, id: u32) -> bool {
        self.tombstones.is_none_or(|t| !t[id as usize])
    }
}

impl RoarIndex {
    /// Pairs the index with its base vectors for searching.
    pub fn graph<'a>(&'a self, base: &'a VectorSet) -> AdjacencyGraph<'a> {
        debug_assert_eq!(base.len(), self.len());
        AdjacencyGraph {
            adjacency: &self.adjacency,
            base,
            entry: self.medoid,
            tombstones: Some(&self.tombstones),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Online,
    /// Also returns the whole pool at convergence.
    Construction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    pub ids: Vec<u32>,
    pub dists: Vec<f32>,
    /// Number of expanded nodes.
    pub hops: usize,
    /// Number of distinct nodes whose distance to the query was computed.
    pub visited: usize,
    /// Final pool contents (construction mode only).
    pub pool: Option<Vec<Neighbor>>,
    pub latency_micros: f64,
}

#[derive(Clone, Copy)]
struct Slot {
    n: Neighbor,
    expanded: bool,
}

/// Reusable per-thread search state.
pub struct Searcher {
    marks: Vec<u32>,
    epoch: u32,
    pool: Vec<Slot>,
}

impl Searcher {
    pub fn new(node_count: usize) -> Self {
        Self {
            marks: vec![0; node_count],
            epoch: 0,
            pool: Vec::new(),
        }
    }

    fn next_epoch(&mut self, n: usize) {
        if self.marks.len() < n {
            self.marks.resize(n, 0);
        }
        if self.epoch == u32::MAX {
            self.marks.iter_mut().for_each(|m| *m = 0);
            self.epoch = 0;
        }
        self.epoch += 1;
    }

    #[inline]
    fn visit(&mut self, id: u32) -> bool {
        let m = &mut self.marks[id as usize];
        if *m == self.epoch {
            false
        } else {
            *m = self.epoch;
            true
        }
    }

    pub fn search<G: SearchGraph + ?Sized>(
        &mut self,
        graph: &G,
        query: &[f32],
        l: usize,
        k: usize,
        mode: SearchMode,
    ) -> Result<SearchReport> {
        if k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        if k > l {
            return Err(invalid(format!("k={k} exceeds pool size L={l}")));
        }
        if graph.node_count() == 0 {
            return Err(Error::EmptySet);
        }
        if query.len() != graph.dim() {
            return Err(Error::DimensionMismatch {
                expected: graph.dim(),
                found: query.len(),
            });
        }
        let start = Instant::now();
        let (hops, visited) = self.run(graph, query, l);
        let mut ids = Vec::with_capacity(k);
        let mut dists = Vec::with_capacity(k);
        for s in self.pool.iter().filter(|s| graph.is_result(s.n.id)).take(k) {
            ids.push(s.n.id);
            dists.push(s.n.distance);
        }
        let pool = match mode {
            SearchMode::Online => None,
            SearchMode::Construction => Some(self.pool.iter().map(|s| s.n).collect()),
        };
        Ok(SearchReport {
            ids,
            dists,
            hops,
            visited,
            pool,
            latency_micros: start.elapsed().as_secs_f64() * 1e6,
        })
    }

    /// Construction-time search: returns the converged pool only.
    pub(crate) fn pool_for<G: SearchGraph + ?Sized>(
        &mut self,
        graph: &G,
        query: &[f32],
        l: usize,
    ) -> Vec<Neighbor> {
        self.run(graph, query, l);
        self.pool.iter().map(|s| s.n).collect()
    }

    fn run<G: SearchGraph + ?Sized>(&mut self, graph: &G, query: &[f32], l: usize) -> (usize, usize) {
        let l = l.max(1);
        self.next_epoch(graph.node_count());
        self.pool.clear();
        let entry = graph.entry();
        self.visit(entry);
        self.pool.push(Slot {
            n: Neighbor::new(entry, graph.distance(entry, query)),
            expanded: false,
        });
        let mut visited = 1;
        let mut hops = 0;
        let mut cursor = 0;
        while cursor < self.pool.len() {
            if self.pool[cursor].expanded {
                cursor += 1;
                continue;
            }
            self.pool[cursor].expanded = true;
            hops += 1;
            let node = self.pool[cursor].n.id;
            let mut next = cursor + 1;
            for &nb in graph.neighbors(node) {
                if !self.visit(nb) {
                    continue;
                }
                visited += 1;
                let cand = Neighbor::new(nb, graph.distance(nb, query));
                if self.pool.len() >= l && cand >= self.pool[self.pool.len() - 1].n {
                    continue;
                }
                let pos = self.pool.partition_point(|s| s.n < cand);
                self.pool.insert(
                    pos,
                    Slot {
                        n: cand,
                        expanded: false,
                    },
                );
                if self.pool.len() > l {
                    self.pool.pop();
                }
                next = next.min(pos);
            }
            cursor = next;
        }
        (hops, visited)
    }
}

/// One-off beam search over an index from its medoid.
pub fn beam_search(
    index: &RoarIndex,
    base: &VectorSet,
    query: &[f32],
    l: usize,
    k: usize,
    mode: SearchMode,
) -> Result<SearchReport> {
    if index.is_empty() {
        return Err(Error::EmptySet);
    }
    Searcher::new(index.len()).search(&index.graph(base), query, l, k, mode)
}

/// Aggregate of a batch of searches.
#[derive(Debug, Clone)]
pub struct BatchReport {
    pub reports: Vec<SearchReport>,
    /// Mean recall@k against the supplied ground truth, if any.
    pub mean_recall: Option<f64>,
    pub qps: f64,
    pub mean_hops: f64,
    pub mean_visited: f64,
    pub wall_secs: f64,
}

impl BatchReport {
    pub fn ids(&self) -> Vec<Vec<u32>> {
        self.reports.iter().map(|r| r.ids.clone()).collect()
    }
}

/// Searches every query. Per-query results are identical to serial
/// [`Searcher::search`] calls regardless of `threads`.
pub fn batch_search<G: SearchGraph + Sync + ?Sized>(
    graph: &G,
    queries: &VectorSet,
    l: usize,
    k: usize,
    threads: usize,
    truth: Option<&GroundTruth>,
) -> Result<BatchReport> {
    if let Some(gt) = truth {
        if gt.len() != queries.len() {
            return Err(invalid(format!(
                "{} queries but ground truth has {} rows",
                queries.len(),
                gt.len()
            )));
        }
        if gt.k() < k {
            return Err(invalid(format!("ground truth k={} is below k={k}", gt.k())));
        }
    }
    let n = graph.node_count();
    let start = Instant::now();
    let reports = parallel::map_indexed(
        threads,
        queries.len(),
        || Searcher::new(n),
        |s, i| s.search(graph, queries.row(i), l, k, SearchMode::Online),
    )
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let wall_secs = start.elapsed().as_secs_f64();
    let count = reports.len().max(1) as f64;
    let mean_recall = match truth {
        Some(gt) => {
            let mut sum = 0.0;
            for (q, r) in reports.iter().enumerate() {
                sum += recall_at_k(&r.ids, gt.ids(q), k)?;
            }
            Some(sum / count)
        }
        None => None,
    };
    Ok(BatchReport {
        mean_hops: reports.iter().map(|r| r.hops as f64).sum::<f64>() / count,
        mean_visited: reports.iter().map(|r| r.visited as f64).sum::<f64>() / count,
        qps: if wall_secs > 0.0 {
            reports.len() as f64 / wall_secs
        } else {
            f64::INFINITY
        },
        reports,
        mean_recall,
        wall_secs,
    })
}
