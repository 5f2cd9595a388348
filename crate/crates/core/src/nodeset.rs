//! Sets of interior node indices.

use serde::{Serialize, Serializer};

use crate::domain::GridDomain;
use crate::geometry::Point;

/// A subset of `0..universe` with O(1) membership and sorted iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSet {
    mask: Vec<bool>,
    members: Vec<usize>,
}

impl Serialize for NodeSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.members.serialize(s)
    }
}

impl NodeSet {
    pub fn empty(universe: usize) -> Self {
        NodeSet {
            mask: vec![false; universe],
            members: Vec::new(),
        }
    }

    pub fn full(universe: usize) -> Self {
        NodeSet {
            mask: vec![true; universe],
            members: (0..universe).collect(),
        }
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        let members = mask.iter().enumerate().filter_map(|(i, &m)| m.then_some(i)).collect();
        NodeSet { mask, members }
    }

    pub fn from_nodes(universe: usize, nodes: impl IntoIterator<Item = usize>) -> Self {
        let mut mask = vec![false; universe];
        for n in nodes {
            mask[n] = true;
        }
        Self::from_mask(mask)
    }

    pub fn from_predicate(universe: usize, pred: impl Fn(usize) -> bool) -> Self {
        Self::from_mask((0..universe).map(pred).collect())
    }

    /// Interior nodes in the open Euclidean ball `B_r(center)`.
    pub fn ball(grid: &GridDomain, center: Point, r: f64) -> Self {
        Self::from_predicate(grid.interior_count(), |n| grid.point(n).dist(center) < r)
    }

    pub fn universe(&self) -> usize {
        self.mask.len()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    #[inline]
    pub fn contains(&self, n: usize) -> bool {
        self.mask[n]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.members
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        Self::from_mask(self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect())
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        Self::from_mask(self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect())
    }

    pub fn complement(&self) -> NodeSet {
        Self::from_mask(self.mask.iter().map(|m| !m).collect())
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.members.iter().all(|&n| other.mask[n])
    }

    /// Members with at least one 4-neighbour outside the set (ghost nodes
    /// count as outside).
    pub fn inner_boundary(&self, grid: &GridDomain) -> NodeSet {
        use crate::domain::Neighbor;
        Self::from_nodes(
            self.universe(),
            self.members.iter().copied().filter(|&n| {
                [(1, 0), (-1, 0), (0, 1), (0, -1)]
                    .iter()
                    .any(|&(di, dj)| !matches!(grid.neighbor(n, di, dj), Neighbor::Interior(m) if self.mask[m]))
            }),
        )
    }

    /// Whether the set is 4-connected through its own members.
    pub fn is_connected(&self, grid: &GridDomain) -> bool {
        let Some(&start) = self.members.first() else {
            return true;
        };
        let mut seen = vec![false; self.universe()];
        let mut stack = vec![start];
        seen[start] = true;
        let mut count = 0;
        while let Some(n) = stack.pop() {
            count += 1;
            for m in grid.interior_neighbors4(n) {
                if self.mask[m] && !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
        count == self.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_algebra() {
        let a = NodeSet::from_nodes(6, [0, 2, 4]);
        let b = NodeSet::from_nodes(6, [4, 2, 5]);
        assert_eq!(a.union(&b).as_slice(), &[0, 2, 4, 5]);
        assert_eq!(a.intersection(&b).as_slice(), &[2, 4]);
        assert_eq!(a.complement().as_slice(), &[1, 3, 5]);
        assert!(a.intersection(&b).is_subset(&a));
        assert!(!a.is_subset(&b));
        assert_eq!(serde_json::to_string(&a).unwrap(), "[0,2,4]");
    }
}
