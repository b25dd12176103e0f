use crate::error::{invalid, Result};
use crate::graph::bipartite::BipartiteGraph;
use crate::search::SearchGraph;
use crate::vectors::VectorSet;

/// The bipartite graph viewed as one searchable graph.
///
/// Base nodes keep their ids; query node `t` becomes `base.len() + t`.
/// Query nodes route the search but never appear in results.
pub struct BipartiteSearchGraph<'a> {
    adjacency: Vec<Vec<u32>>,
    base: &'a VectorSet,
    queries: &'a VectorSet,
    entry: u32,
}

impl<'a> BipartiteSearchGraph<'a> {
    pub fn new(
        bipartite: &BipartiteGraph,
        base: &'a VectorSet,
        queries: &'a VectorSet,
        entry: u32,
    ) -> Result<Self> {
        base.check_compatible(queries)?;
        if bipartite.base_count() != base.len() || bipartite.query_count() != queries.len() {
            return Err(invalid("bipartite graph does not match the supplied vectors"));
        }
        let offset = base.len() as u32;
        let mut adjacency = Vec::with_capacity(base.len() + queries.len());
        adjacency.extend(
            bipartite
                .base_adjacency()
                .iter()
                .map(|l| l.iter().map(|t| t + offset).collect::<Vec<u32>>()),
        );
        adjacency.extend(bipartite.query_adjacency().iter().cloned());
        Ok(Self {
            adjacency,
            base,
            queries,
            entry,
        })
    }
}

impl SearchGraph for BipartiteSearchGraph<'_> {
    fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    fn entry(&self) -> u32 {
        self.entry
    }

    #[inline]
    fn neighbors(&self, id: u32) -> &[u32] {
        &self.adjacency[id as usize]
    }

    #[inline]
    fn distance(&self, id: u32, query: &[f32]) -> f32 {
        let n = self.base.len() as u32;
        if id < n {
            self.base.distance_to(id, query)
        } else {
            self.queries.distance_to(id - n, query)
        }
    }

    fn dim(&self) -> usize {
        self.base.dim()
    }

    #[inline]
    fn is_result(&self, id: u32) -> bool {
        (id as usize) < self.base.len()
    }
}
