use crate::error::{invalid, Error, Result};
use crate::truth::GroundTruth;

/// The query-base bipartite graph.
///
/// Each construction query links to its nearest base vectors except the
/// very closest one; that closest base vector links back to the query
/// instead. Every query therefore has exactly one incoming edge, and base
/// nodes only point at queries they are the nearest neighbor of.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    pub(crate) query_out: Vec<Vec<u32>>,
    pub(crate) base_out: Vec<Vec<u32>>,
}

impl BipartiteGraph {
    /// Builds the graph from the `nq` nearest base neighbors of every
    /// construction query (`truth.k()` is taken as `nq`).
    pub fn build(n_base: usize, truth: &GroundTruth) -> Result<Self> {
        if truth.k() < 2 {
            return Err(invalid("bipartite construction needs nq >= 2"));
        }
        if let Some(max) = truth.max_id() {
            if max as usize >= n_base {
                return Err(Error::IdOutOfRange {
                    id: u64::from(max),
                    bound: n_base as u64,
                });
            }
        }
        let mut query_out = Vec::with_capacity(truth.len());
        let mut base_out = vec![Vec::new(); n_base];
        for t in 0..truth.len() {
            let ids = truth.ids(t);
            base_out[ids[0] as usize].push(t as u32);
            query_out.push(ids[1..].to_vec());
        }
        Ok(Self { query_out, base_out })
    }

    /// Assembles a graph from raw edge lists, checking structural invariants.
    pub fn from_parts(query_out: Vec<Vec<u32>>, base_out: Vec<Vec<u32>>) -> Result<Self> {
        let g = Self { query_out, base_out };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let nb = self.base_out.len() as u64;
        let nq = self.query_out.len() as u64;
        let mut in_degree = vec![0u32; self.query_out.len()];
        for list in &self.base_out {
            for &t in list {
                if u64::from(t) >= nq {
                    return Err(Error::IdOutOfRange { id: u64::from(t), bound: nq });
                }
                in_degree[t as usize] += 1;
            }
        }
        if let Some(t) = in_degree.iter().position(|&d| d != 1) {
            return Err(Error::Corrupt(format!(
                "query node {t} has {} base in-edges, expected exactly one",
                in_degree[t]
            )));
        }
        for list in &self.query_out {
            for &b in list {
                if u64::from(b) >= nb {
                    return Err(Error::IdOutOfRange { id: u64::from(b), bound: nb });
                }
            }
        }
        Ok(())
    }

    pub fn query_count(&self) -> usize {
        self.query_out.len()
    }

    pub fn base_count(&self) -> usize {
        self.base_out.len()
    }

    /// Base nodes reachable from query `t`.
    #[inline]
    pub fn query_neighbors(&self, t: u32) -> &[u32] {
        &self.query_out[t as usize]
    }

    /// Queries for which base node `b` is the nearest neighbor.
    #[inline]
    pub fn base_neighbors(&self, b: u32) -> &[u32] {
        &self.base_out[b as usize]
    }

    pub fn query_adjacency(&self) -> &[Vec<u32>] {
        &self.query_out
    }

    pub fn base_adjacency(&self) -> &[Vec<u32>] {
        &self.base_out
    }

    /// A pivot is a base node with at least one query attached to it.
    pub fn is_pivot(&self, b: u32) -> bool {
        !self.base_out[b as usize].is_empty()
    }

    /// The closest base node of query `t`.
    pub fn anchor_of(&self, t: u32) -> Option<u32> {
        self.base_out
            .iter()
            .position(|l| l.contains(&t))
            .map(|b| b as u32)
    }

    pub(crate) fn push_base(&mut self) {
        self.base_out.push(Vec::new());
    }

    pub(crate) fn push_query_neighbor(&mut self, t: u32, b: u32) {
        self.query_out[t as usize].push(b);
    }
}
