//! d- and σ-separation by reachability over walk states.
//!
//! A path is σ-open given `S` iff some walk between the endpoints is open,
//! where a walk is open when every collider on it lies in `S` and every
//! non-collider in `S` only points to walk neighbours inside its own strongly
//! connected component. The search therefore runs over states
//! `(node, how the walk arrived)` and never enumerates paths. On acyclic
//! graphs every component is a singleton and the rule collapses to
//! d-separation.

use serde::{Deserialize, Serialize};

use super::{DirectedGraph, Node, NodeSet};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeparationKind {
    #[serde(rename = "d")]
    DSeparation,
    #[serde(rename = "sigma")]
    SigmaSeparation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Arrival {
    Start,
    /// Arrived along `prev -> v`.
    Head,
    /// Arrived along `v -> prev` with `prev` in the component of `v`.
    TailSame,
    /// Arrived along `v -> prev` with `prev` outside the component of `v`.
    TailOther,
}

impl Arrival {
    fn slot(self) -> usize {
        self as usize
    }
}

/// Reusable separation queries over one graph.
#[derive(Clone, Debug)]
pub struct Separator<'g> {
    graph: &'g DirectedGraph,
    kind: SeparationKind,
    component: Vec<usize>,
}

impl<'g> Separator<'g> {
    /// Fails with [`Error::CyclicGraph`] when d-separation is requested on a
    /// cyclic graph.
    pub fn new(graph: &'g DirectedGraph, kind: SeparationKind) -> Result<Self> {
        let component = match kind {
            SeparationKind::SigmaSeparation => graph.scc_ids(),
            SeparationKind::DSeparation => {
                if !graph.is_acyclic() {
                    return Err(Error::CyclicGraph);
                }
                (0..graph.node_count()).collect()
            }
        };
        Ok(Self { graph, kind, component })
    }

    pub fn graph(&self) -> &'g DirectedGraph {
        self.graph
    }

    pub fn kind(&self) -> SeparationKind {
        self.kind
    }

    /// Whether `a` and `b` are separated given `s`. Adjacent nodes are never
    /// separated.
    pub fn separated(&self, a: Node, b: Node, s: &NodeSet) -> Result<bool> {
        self.validate(a, b, s)?;
        let in_s = s.mask(self.graph.node_count());
        Ok(!self.connected(a, b, &in_s, false))
    }

    /// Whether every path between `x` and `y` whose first edge points into
    /// `x` is blocked by `z`.
    pub(crate) fn backdoor_blocked(&self, x: Node, y: Node, z: &NodeSet) -> Result<bool> {
        self.validate(x, y, z)?;
        let in_s = z.mask(self.graph.node_count());
        Ok(!self.connected(x, y, &in_s, true))
    }

    fn validate(&self, a: Node, b: Node, s: &NodeSet) -> Result<()> {
        self.graph.check_node(a)?;
        self.graph.check_node(b)?;
        for v in s {
            self.graph.check_node(v)?;
        }
        if a == b {
            return Err(Error::InvalidQuery("endpoints must be distinct".into()));
        }
        if s.contains(a) || s.contains(b) {
            return Err(Error::InvalidQuery("conditioning set contains an endpoint".into()));
        }
        Ok(())
    }

    fn connected(&self, start: Node, target: Node, in_s: &[bool], backdoor: bool) -> bool {
        let g = self.graph;
        let n = g.node_count();
        let mut seen = vec![[false; 4]; n];
        let mut stack: Vec<(Node, Arrival)> = vec![(start, Arrival::Start)];
        seen[start][Arrival::Start.slot()] = true;

        let mut push = |stack: &mut Vec<(Node, Arrival)>, w: Node, arr: Arrival| {
            if backdoor && w == start {
                return false;
            }
            if w == target {
                return true;
            }
            if !seen[w][arr.slot()] {
                seen[w][arr.slot()] = true;
                stack.push((w, arr));
            }
            false
        };

        while let Some((v, arr)) = stack.pop() {
            let cv = self.component[v];
            let conditioned = in_s[v];

            // Leave v against an edge w -> v: arrowhead at v on this side.
            let via_parents = match arr {
                Arrival::Start => true,
                Arrival::Head => conditioned,
                Arrival::TailSame => true,
                Arrival::TailOther => !conditioned,
            };
            if via_parents {
                for &w in g.parents(v) {
                    let next = if self.component[w] == cv {
                        Arrival::TailSame
                    } else {
                        Arrival::TailOther
                    };
                    if push(&mut stack, w, next) {
                        return true;
                    }
                }
            }

            // Leave v along an edge v -> w: v is a non-collider.
            if arr == Arrival::Start && backdoor {
                continue;
            }
            let tail_ok = !(conditioned && arr == Arrival::TailOther);
            if tail_ok {
                for &w in g.children(v) {
                    if conditioned && self.component[w] != cv {
                        continue;
                    }
                    if push(&mut stack, w, Arrival::Head) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Whether `a` and `b` are separated given `s` under `kind`.
pub fn is_separated(
    g: &DirectedGraph,
    kind: SeparationKind,
    a: Node,
    b: Node,
    s: &NodeSet,
) -> Result<bool> {
    Separator::new(g, kind)?.separated(a, b, s)
}

/// Observed Markov blanket of `x` by total conditioning: every observed `y`
/// that stays connected to `x` given all other observed nodes.
pub fn markov_blanket(g: &DirectedGraph, x: Node, kind: SeparationKind) -> Result<NodeSet> {
    g.check_node(x)?;
    if !g.is_observed(x) {
        return Err(Error::LatentNode(g.label(x).to_string()));
    }
    let sep = Separator::new(g, kind)?;
    let others = g.observed().without(x);
    let mut mb = NodeSet::new();
    for y in others.iter() {
        if !sep.separated(x, y, &others.without(y))? {
            mb.insert(y);
        }
    }
    Ok(mb)
}
