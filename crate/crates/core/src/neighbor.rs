use std::cmp::Ordering;

/// A node id paired with its distance to some reference point.
///
/// Ordering is by distance, then by id, so equal distances always resolve
/// toward the smaller id. The exact oracle and the graph search share this
/// rule, which keeps their outputs directly comparable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub id: u32,
    pub distance: f32,
}

impl Neighbor {
    #[inline]
    pub fn new(id: u32, distance: f32) -> Self {
        Self { id, distance }
    }
}

impl Eq for Neighbor {}

impl Ord for Neighbor {
    #[inline]
    fn cmp(&self, other: &Self) -> Ordering {
        self.distance
            .partial_cmp(&other.distance)
            .unwrap_or(Ordering::Equal)
            .then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Neighbor {
    #[inline]
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_break_toward_smaller_id() {
        let mut v = [Neighbor::new(7, 1.0),
            Neighbor::new(3, 1.0),
            Neighbor::new(5, 0.5)];
        v.sort();
        let ids: Vec<u32> = v.iter().map(|n| n.id).collect();
        assert_eq!(ids, vec![5, 3, 7]);
    }

    #[test]
    fn signed_zeros_compare_equal() {
        assert!(Neighbor::new(1, -0.0) < Neighbor::new(2, 0.0));
        assert!(Neighbor::new(2, -0.0) > Neighbor::new(1, 0.0));
    }
}
