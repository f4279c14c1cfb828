use super::{DirectedGraph, Node, NodeSet};
use crate::error::{Error, Result};

/// σ-acyclification.
///
/// Nodes of one strongly connected component become a transitive tournament
/// following the given order (ascending index when no order is supplied for
/// that component). Across components, `u -> v` is present iff `u` has an edge
/// into some member of `v`'s component.
pub fn acyclify(g: &DirectedGraph, scc_order: Option<&[Vec<Node>]>) -> Result<DirectedGraph> {
    let comps = g.strongly_connected_components();
    let mut comp_of = vec![0usize; g.node_count()];
    for (c, members) in comps.iter().enumerate() {
        for v in members {
            comp_of[v] = c;
        }
    }

    let mut rank = vec![0usize; g.node_count()];
    for members in &comps {
        for (r, v) in members.iter().enumerate() {
            rank[v] = r;
        }
    }
    if let Some(orders) = scc_order {
        let mut assigned = vec![false; comps.len()];
        for order in orders {
            let Some(&first) = order.first() else {
                return Err(Error::InvalidOrder("empty ordering".into()));
            };
            g.check_node(first)?;
            let c = comp_of[first];
            let as_set: NodeSet = order.iter().copied().collect();
            if as_set != comps[c] || as_set.len() != order.len() {
                return Err(Error::InvalidOrder(format!(
                    "ordering {order:?} is not a permutation of component {}",
                    comps[c]
                )));
            }
            if std::mem::replace(&mut assigned[c], true) {
                return Err(Error::InvalidOrder(format!(
                    "component {} ordered twice",
                    comps[c]
                )));
            }
            for (r, &v) in order.iter().enumerate() {
                rank[v] = r;
            }
        }
    }

    let mut edges = Vec::new();
    for members in &comps {
        for a in members {
            for b in members {
                if rank[a] < rank[b] {
                    edges.push((a, b));
                }
            }
        }
    }
    for (u, w) in g.edges() {
        let target = comp_of[w];
        if comp_of[u] != target {
            edges.extend(comps[target].iter().map(|v| (u, v)));
        }
    }
    g.with_edges(edges)
}

/// Acyclification for a treatment/outcome pair in pre-treatment shape: the
/// outcome stays a sink, the treatment's only possible child is the outcome,
/// and the edge `x -> y` is kept exactly as in `g`.
pub fn acyclify_preserving(g: &DirectedGraph, x: Node, y: Node) -> Result<DirectedGraph> {
    g.check_node(x)?;
    g.check_node(y)?;
    if x == y {
        return Err(Error::InvalidQuery("treatment and outcome must differ".into()));
    }
    if !g.descendants(y)?.is_empty() {
        return Err(Error::Precondition(format!(
            "outcome `{}` has descendants",
            g.label(y)
        )));
    }
    if !g.descendants(x)?.is_subset(&NodeSet::singleton(y)) {
        return Err(Error::Precondition(format!(
            "treatment `{}` has descendants other than the outcome",
            g.label(x)
        )));
    }
    let acy = acyclify(g, None)?;
    debug_assert!(acy.children(y).is_empty());
    debug_assert_eq!(acy.has_edge(x, y), g.has_edge(x, y));
    Ok(acy)
}
