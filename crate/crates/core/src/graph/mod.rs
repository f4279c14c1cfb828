//! Directed graphs with an observed/latent partition, possibly cyclic.
//!
//! Nodes are dense indices; labels exist only to name nodes at the I/O
//! boundary. Every operation is a pure function of an immutable graph.

mod acyclify;
mod adjustment;
pub mod io;
mod nodeset;
mod scc;
mod separation;

use std::collections::{HashMap, VecDeque};

pub use acyclify::{acyclify, acyclify_preserving};
pub use adjustment::{
    enumerate_valid_adjustment_sets, intervention_node_check, is_backdoor_adjustment_set,
    is_pre_treatment,
};
pub use nodeset::{Node, NodeSet};
pub use separation::{is_separated, markov_blanket, SeparationKind, Separator};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedGraph {
    labels: Vec<String>,
    index: HashMap<String, Node>,
    parents: Vec<Vec<Node>>,
    children: Vec<Vec<Node>>,
    observed: Vec<bool>,
}

impl DirectedGraph {
    /// Builds a graph from labels, edges `(from, to)` and the observed nodes.
    /// Duplicate edges collapse; self-loops are rejected.
    pub fn new<E, O>(labels: Vec<String>, edges: E, observed: O) -> Result<Self>
    where
        E: IntoIterator<Item = (Node, Node)>,
        O: IntoIterator<Item = Node>,
    {
        let n = labels.len();
        let mut index = HashMap::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for (i, j) in edges {
            check_range(i, n)?;
            check_range(j, n)?;
            if i == j {
                return Err(Error::SelfLoop(labels[i].clone()));
            }
            children[i].push(j);
            parents[j].push(i);
        }
        for adj in parents.iter_mut().chain(children.iter_mut()) {
            adj.sort_unstable();
            adj.dedup();
        }
        let mut obs = vec![false; n];
        for o in observed {
            check_range(o, n)?;
            obs[o] = true;
        }
        Ok(Self { labels, index, parents, children, observed: obs })
    }

    /// All nodes observed.
    pub fn fully_observed<E>(labels: Vec<String>, edges: E) -> Result<Self>
    where
        E: IntoIterator<Item = (Node, Node)>,
    {
        let n = labels.len();
        Self::new(labels, edges, 0..n)
    }

    /// Convenience constructor from string labels and labelled edges; every
    /// node is observed.
    pub fn from_labels(labels: &[&str], edges: &[(&str, &str)]) -> Result<Self> {
        let owned: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let lookup = |l: &str| {
            labels.iter().position(|x| *x == l).ok_or_else(|| Error::UnknownLabel(l.to_string()))
        };
        let e = edges
            .iter()
            .map(|(a, b)| Ok((lookup(a)?, lookup(b)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::fully_observed(owned, e)
    }

    /// Node labels are `V0..V{n-1}`.
    pub fn with_default_labels<E, O>(n: usize, edges: E, observed: O) -> Result<Self>
    where
        E: IntoIterator<Item = (Node, Node)>,
        O: IntoIterator<Item = Node>,
    {
        Self::new((0..n).map(|i| format!("V{i}")).collect(), edges, observed)
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn nodes(&self) -> std::ops::Range<Node> {
        0..self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: Node) -> &str {
        &self.labels[v]
    }

    pub fn index_of(&self, label: &str) -> Result<Node> {
        self.index.get(label).copied().ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn parents(&self, v: Node) -> &[Node] {
        &self.parents[v]
    }

    pub fn children(&self, v: Node) -> &[Node] {
        &self.children[v]
    }

    pub fn has_edge(&self, from: Node, to: Node) -> bool {
        self.children[from].binary_search(&to).is_ok()
    }

    /// Edges in ascending `(from, to)` order.
    pub fn edges(&self) -> impl Iterator<Item = (Node, Node)> + '_ {
        self.children.iter().enumerate().flat_map(|(i, ch)| ch.iter().map(move |&j| (i, j)))
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    pub fn is_observed(&self, v: Node) -> bool {
        self.observed[v]
    }

    pub fn observed(&self) -> NodeSet {
        NodeSet::from_mask(&self.observed)
    }

    pub fn latent(&self) -> NodeSet {
        self.nodes().filter(|&v| !self.observed[v]).collect()
    }

    pub fn check_node(&self, v: Node) -> Result<()> {
        check_range(v, self.node_count())
    }

    /// Nodes with a directed path to `x`. `x` itself is included only when it
    /// lies on a directed cycle.
    pub fn ancestors(&self, x: Node) -> Result<NodeSet> {
        self.check_node(x)?;
        Ok(NodeSet::from_mask(&self.reach(&self.parents[x], &self.parents)))
    }

    /// Nodes reachable from `x` by a directed path. `x` itself is included only
    /// when it lies on a directed cycle.
    pub fn descendants(&self, x: Node) -> Result<NodeSet> {
        self.check_node(x)?;
        Ok(NodeSet::from_mask(&self.reach(&self.children[x], &self.children)))
    }

    /// Reflexive ancestor mask of a set: `s` together with every node that has
    /// a directed path into `s`.
    pub fn ancestor_mask_of(&self, s: &NodeSet) -> Vec<bool> {
        let seeds: Vec<Node> = s.iter().collect();
        let mut mask = self.reach(&seeds, &self.parents);
        for v in s {
            mask[v] = true;
        }
        mask
    }

    fn reach(&self, seeds: &[Node], adj: &[Vec<Node>]) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        let mut queue: VecDeque<Node> = VecDeque::new();
        for &s in seeds {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Strongly connected components, ordered by smallest contained index.
    pub fn strongly_connected_components(&self) -> Vec<NodeSet> {
        scc::components(self)
    }

    /// Component id per node; ids follow the ordering of
    /// [`strongly_connected_components`](Self::strongly_connected_components).
    pub fn scc_ids(&self) -> Vec<usize> {
        let mut ids = vec![0; self.node_count()];
        for (c, comp) in self.strongly_connected_components().iter().enumerate() {
            for v in comp {
                ids[v] = c;
            }
        }
        ids
    }

    pub fn is_acyclic(&self) -> bool {
        scc::topological_order(self).is_some()
    }

    /// The graph extended by one parentless node `label` with the single edge
    /// `label -> target`. The new node is observed and gets the last index.
    pub fn with_intervention_node(&self, target: Node, label: &str) -> Result<Self> {
        self.check_node(target)?;
        let mut labels = self.labels.clone();
        let mut name = label.to_string();
        while self.index.contains_key(&name) {
            name.push('\'');
        }
        labels.push(name);
        let new = self.node_count();
        let edges = self.edges().chain(std::iter::once((new, target)));
        let observed = self.observed().into_vec().into_iter().chain(std::iter::once(new));
        Self::new(labels, edges, observed)
    }

    /// Same nodes and observation pattern, different edge set.
    pub fn with_edges<E>(&self, edges: E) -> Result<Self>
    where
        E: IntoIterator<Item = (Node, Node)>,
    {
        Self::new(self.labels.clone(), edges, self.observed().into_vec())
    }

    /// Same nodes and edges, different observed set.
    pub fn with_observed<O>(&self, observed: O) -> Result<Self>
    where
        O: IntoIterator<Item = Node>,
    {
        Self::new(self.labels.clone(), self.edges().collect::<Vec<_>>(), observed)
    }
}

fn check_range(v: Node, n: usize) -> Result<()> {
    if v < n {
        Ok(())
    } else {
        Err(Error::NodeOutOfRange { index: v, count: n })
    }
}
