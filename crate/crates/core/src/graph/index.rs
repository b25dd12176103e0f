use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::metric::Metric;

/// Construction parameters stored alongside an index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildParams {
    /// Nearest neighbors gathered per construction query.
    pub nq: u32,
    /// Degree limit applied by each pruning pass.
    pub max_degree: u32,
    /// Candidate pool capacity used during construction.
    pub search_l: u32,
}

impl Default for BuildParams {
    fn default() -> Self {
        Self {
            nq: 100,
            max_degree: 35,
            search_l: 500,
        }
    }
}

impl BuildParams {
    pub fn validate(&self) -> Result<()> {
        if self.nq < 2 {
            return Err(crate::error::invalid("nq must be at least 2"));
        }
        if self.max_degree < 1 {
            return Err(crate::error::invalid("max degree must be at least 1"));
        }
        if self.search_l < 1 {
            return Err(crate::error::invalid("L must be at least 1"));
        }
        Ok(())
    }

    /// Hard cap on the out-degree of a finished index.
    pub fn degree_cap(&self) -> usize {
        2 * self.max_degree as usize
    }
}

/// A directed proximity graph over base vectors.
///
/// The vectors themselves are not owned by the index; every operation that
/// needs them takes the base [`VectorSet`](crate::VectorSet) explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct RoarIndex {
    pub(crate) metric: Metric,
    pub(crate) dim: usize,
    pub(crate) adjacency: Vec<Vec<u32>>,
    pub(crate) medoid: u32,
    pub(crate) params: BuildParams,
    pub(crate) tombstones: Vec<bool>,
}

impl RoarIndex {
    pub fn from_parts(
        metric: Metric,
        dim: usize,
        adjacency: Vec<Vec<u32>>,
        medoid: u32,
        params: BuildParams,
        tombstones: Vec<bool>,
    ) -> Result<Self> {
        let index = Self {
            metric,
            dim,
            adjacency,
            medoid,
            params,
            tombstones,
        };
        index.validate()?;
        Ok(index)
    }

    /// Checks ids, self loops, duplicates, the medoid and tombstone shape.
    /// The degree cap is checked separately by [`RoarIndex::check_degree`]
    /// because intermediate construction stages may exceed it.
    pub fn validate(&self) -> Result<()> {
        let n = self.adjacency.len();
        if self.tombstones.len() != n {
            return Err(Error::Corrupt(format!(
                "{} tombstone flags for {n} nodes",
                self.tombstones.len()
            )));
        }
        if n > 0 && self.medoid as usize >= n {
            return Err(Error::IdOutOfRange {
                id: u64::from(self.medoid),
                bound: n as u64,
            });
        }
        let mut seen = vec![u32::MAX; n];
        for (u, list) in self.adjacency.iter().enumerate() {
            for &v in list {
                if v as usize >= n {
                    return Err(Error::IdOutOfRange {
                        id: u64::from(v),
                        bound: n as u64,
                    });
                }
                if v as usize == u {
                    return Err(Error::Corrupt(format!("self loop at node {u}")));
                }
                if seen[v as usize] == u as u32 {
                    return Err(Error::Corrupt(format!("duplicate edge {u} -> {v}")));
                }
                seen[v as usize] = u as u32;
            }
        }
        Ok(())
    }

    pub fn check_degree(&self) -> Result<()> {
        let cap = self.params.degree_cap();
        match self.adjacency.iter().position(|l| l.len() > cap) {
            Some(u) => Err(Error::Corrupt(format!(
                "node {u} has degree {} above cap {cap}",
                self.adjacency[u].len()
            ))),
            None => Ok(()),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    #[inline]
    pub fn neighbors(&self, id: u32) -> &[u32] {
        &self.adjacency[id as usize]
    }

    pub fn adjacency(&self) -> &[Vec<u32>] {
        &self.adjacency
    }

    #[inline]
    pub fn medoid(&self) -> u32 {
        self.medoid
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> BuildParams {
        self.params
    }

    #[inline]
    pub fn is_deleted(&self, id: u32) -> bool {
        self.tombstones[id as usize]
    }

    pub fn tombstones(&self) -> &[bool] {
        &self.tombstones
    }

    pub fn live_count(&self) -> usize {
        self.tombstones.iter().filter(|t| !**t).count()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Number of nodes reachable from the medoid by following out-edges,
    /// including the medoid itself.
    pub fn reachable_from_medoid(&self) -> usize {
        reachable_count(&self.adjacency, self.medoid)
    }

    /// Nodes with no out-edges and no in-edges.
    pub fn isolated_count(&self) -> usize {
        isolated_count(&self.adjacency)
    }
}

/// Breadth-first reachability count from `start`.
pub fn reachable_count(adjacency: &[Vec<u32>], start: u32) -> usize {
    if adjacency.is_empty() {
        return 0;
    }
    hop_distances(adjacency, start)
        .iter()
        .filter(|d| d.is_some())
        .count()
}

/// Breadth-first hop distance from `start` to every node.
pub fn hop_distances(adjacency: &[Vec<u32>], start: u32) -> Vec<Option<u32>> {
    let mut dist = vec![None; adjacency.len()];
    let mut queue = VecDeque::new();
    dist[start as usize] = Some(0);
    queue.push_back(start);
    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize].unwrap();
        for &v in &adjacency[u as usize] {
            if dist[v as usize].is_none() {
                dist[v as usize] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

pub fn isolated_count(adjacency: &[Vec<u32>]) -> usize {
    let mut has_in = vec![false; adjacency.len()];
    for list in adjacency {
        for &v in list {
            has_in[v as usize] = true;
        }
    }
    adjacency
        .iter()
        .zip(&has_in)
        .filter(|(out, has_in)| out.is_empty() && !**has_in)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn index(adj: Vec<Vec<u32>>) -> Result<RoarIndex> {
        let n = adj.len();
        RoarIndex::from_parts(Metric::L2, 2, adj, 0, BuildParams::default(), vec![false; n])
    }

    #[test]
    fn validate_rejects_bad_edges() {
        assert!(index(vec![vec![1], vec![0]]).is_ok());
        assert!(matches!(index(vec![vec![2], vec![0]]), Err(Error::IdOutOfRange { .. })));
        assert!(index(vec![vec![0], vec![]]).is_err());
        assert!(index(vec![vec![1, 1], vec![]]).is_err());
    }

    #[test]
    fn reachability_and_isolation() {
        let idx = index(vec![vec![1], vec![2], vec![], vec![]]).unwrap();
        assert_eq!(idx.reachable_from_medoid(), 3);
        assert_eq!(idx.isolated_count(), 1);
        assert_eq!(
            hop_distances(idx.adjacency(), 0),
            vec![Some(0), Some(1), Some(2), None]
        );
    }

    #[test]
    fn degree_cap_is_twice_m() {
        let p = BuildParams {
            nq: 4,
            max_degree: 1,
            search_l: 4,
        };
        let idx = RoarIndex::from_parts(Metric::L2, 1, vec![vec![1, 2, 3], vec![], vec![], vec![]], 0, p, vec![false; 4]).unwrap();
        assert!(idx.check_degree().is_err());
    }
}
