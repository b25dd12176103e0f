//! Diversity-aware neighbor selection.
//!
//! Candidates arrive sorted by distance to the pivot. The closest is always
//! kept; every later candidate `c` is kept only if the pivot is strictly
//! closer to it than any already-kept neighbor is, i.e.
//! `δ(pivot, c) < δ(c, p)` for every kept `p`. Selection stops at the degree
//! limit. With `fulfill` set, candidates that failed the rule are then used
//! to top the list up to the limit, in their original order.

use crate::error::{invalid, Result};
use crate::neighbor::Neighbor;
use crate::vectors::VectorSet;

/// Selects at most `max_degree` neighbors for a pivot.
///
/// `candidates` must be sorted ascending by distance to the pivot, must not
/// contain the pivot and must hold distinct ids. The returned ids are in
/// acceptance order.
pub fn acquire_neighbors(
    base: &VectorSet,
    candidates: &[Neighbor],
    max_degree: usize,
    fulfill: bool,
) -> Result<Vec<u32>> {
    if max_degree < 1 {
        return Err(invalid("degree limit must be at least 1"));
    }
    Ok(select(base, candidates, max_degree, fulfill))
}

pub(crate) fn select(
    base: &VectorSet,
    candidates: &[Neighbor],
    max_degree: usize,
    fulfill: bool,
) -> Vec<u32> {
    debug_assert!(candidates.windows(2).all(|w| w[0] <= w[1]));
    let mut kept: Vec<u32> = Vec::with_capacity(max_degree.min(candidates.len()));
    let Some(first) = candidates.first() else {
        return kept;
    };
    kept.push(first.id);
    let mut taken = if fulfill {
        let mut t = vec![false; candidates.len()];
        t[0] = true;
        t
    } else {
        Vec::new()
    };
    for (i, c) in candidates.iter().enumerate().skip(1) {
        if kept.len() >= max_degree {
            break;
        }
        let row = base.row(c.id as usize);
        let diverse = kept
            .iter()
            .all(|&p| c.distance < base.metric().distance(row, base.row(p as usize)));
        if diverse {
            kept.push(c.id);
            if fulfill {
                taken[i] = true;
            }
        }
    }
    if fulfill {
        for (i, c) in candidates.iter().enumerate() {
            if kept.len() >= max_degree {
                break;
            }
            if !taken[i] {
                kept.push(c.id);
            }
        }
    }
    kept
}

/// Distances from `pivot` to each id, sorted with the shared tie rule.
pub(crate) fn sorted_candidates(
    base: &VectorSet,
    pivot: &[f32],
    ids: impl IntoIterator<Item = u32>,
) -> Vec<Neighbor> {
    let mut out: Vec<Neighbor> = ids
        .into_iter()
        .map(|id| Neighbor::new(id, base.distance_to(id, pivot)))
        .collect();
    out.sort_unstable();
    out
}
