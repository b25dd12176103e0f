use crate::error::{invalid, Error, Result};

/// Exact nearest neighbors for a batch of queries: `k` ids and distances
/// per query, each row sorted ascending by distance with distinct ids.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    k: usize,
    ids: Vec<u32>,
    dists: Vec<f32>,
}

impl GroundTruth {
    pub fn new(k: usize, ids: Vec<u32>, dists: Vec<f32>) -> Result<Self> {
        if k == 0 {
            return Err(invalid("ground truth requires k >= 1"));
        }
        if ids.len() != dists.len() || !ids.len().is_multiple_of(k) {
            return Err(invalid(format!(
                "ground truth blocks disagree: {} ids, {} dists, k={k}",
                ids.len(),
                dists.len()
            )));
        }
        let gt = Self { k, ids, dists };
        gt.validate()?;
        Ok(gt)
    }

    fn validate(&self) -> Result<()> {
        for row in 0..self.len() {
            let d = self.dists(row);
            if let Some(bad) = d.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { row: row * self.k + bad });
            }
            if d.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::UnsortedRow { row });
            }
            let mut ids = self.ids(row).to_vec();
            ids.sort_unstable();
            if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::DuplicateId { row, id: w[0] });
            }
        }
        Ok(())
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of queries.
    #[inline]
    pub fn len(&self) -> usize {
        self.ids.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    #[inline]
    pub fn ids(&self, query: usize) -> &[u32] {
        &self.ids[query * self.k..(query + 1) * self.k]
    }

    #[inline]
    pub fn dists(&self, query: usize) -> &[f32] {
        &self.dists[query * self.k..(query + 1) * self.k]
    }

    pub fn all_ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn all_dists(&self) -> &[f32] {
        &self.dists
    }

    /// Keeps only the first `k` neighbors of every row.
    pub fn truncate(&self, k: usize) -> Result<GroundTruth> {
        if k == 0 || k > self.k {
            return Err(invalid(format!("cannot truncate k={} to {k}", self.k)));
        }
        let mut ids = Vec::with_capacity(self.len() * k);
        let mut dists = Vec::with_capacity(self.len() * k);
        for q in 0..self.len() {
            ids.extend_from_slice(&self.ids(q)[..k]);
            dists.extend_from_slice(&self.dists(q)[..k]);
        }
        Ok(GroundTruth { k, ids, dists })
    }

    pub fn max_id(&self) -> Option<u32> {
        self.ids.iter().copied().max()
    }
}
