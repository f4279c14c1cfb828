use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

/// Dense node index.
pub type Node = usize;

/// Sorted, duplicate-free set of node indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeSet(Vec<Node>);

impl NodeSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn singleton(v: Node) -> Self {
        Self(vec![v])
    }

    /// Builds a set from a boolean membership mask.
    pub fn from_mask(mask: &[bool]) -> Self {
        Self(mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: Node) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = Node> + ExactSizeIterator + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[Node] {
        &self.0
    }

    pub fn insert(&mut self, v: Node) -> bool {
        match self.0.binary_search(&v) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, v);
                true
            }
        }
    }

    pub fn remove(&mut self, v: Node) -> bool {
        match self.0.binary_search(&v) {
            Ok(pos) => {
                self.0.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    pub fn with(&self, v: Node) -> Self {
        let mut s = self.clone();
        s.insert(v);
        s
    }

    pub fn without(&self, v: Node) -> Self {
        let mut s = self.clone();
        s.remove(v);
        s
    }

    pub fn union(&self, other: &NodeSet) -> Self {
        self.iter().merge(other.iter()).dedup().collect()
    }

    pub fn difference(&self, other: &NodeSet) -> Self {
        self.iter().filter(|v| !other.contains(*v)).collect()
    }

    pub fn intersection(&self, other: &NodeSet) -> Self {
        self.iter().filter(|v| other.contains(*v)).collect()
    }

    pub fn is_disjoint(&self, other: &NodeSet) -> bool {
        self.iter().all(|v| !other.contains(v))
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    /// Membership mask of length `n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for v in self.iter() {
            m[v] = true;
        }
        m
    }

    /// All subsets of size at most `max_size`, ordered by size and then
    /// lexicographically.
    pub fn subsets_up_to(&self, max_size: usize) -> impl Iterator<Item = NodeSet> + '_ {
        (0..=max_size.min(self.len()))
            .flat_map(move |k| self.subsets_of_size(k))
    }

    /// All subsets of exactly `k` elements in lexicographic order.
    pub fn subsets_of_size(&self, k: usize) -> impl Iterator<Item = NodeSet> + '_ {
        self.0.iter().copied().combinations(k).map(NodeSet)
    }

    pub fn into_vec(self) -> Vec<Node> {
        self.0
    }
}

impl FromIterator<Node> for NodeSet {
    fn from_iter<I: IntoIterator<Item = Node>>(iter: I) -> Self {
        let mut v: Vec<Node> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }
}

impl From<Vec<Node>> for NodeSet {
    fn from(v: Vec<Node>) -> Self {
        v.into_iter().collect()
    }
}

impl<const N: usize> From<[Node; N]> for NodeSet {
    fn from(v: [Node; N]) -> Self {
        v.into_iter().collect()
    }
}

impl<'a> IntoIterator for &'a NodeSet {
    type Item = Node;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, Node>>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.iter().join(", "))
    }
}
