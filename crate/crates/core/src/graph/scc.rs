use std::collections::VecDeque;

use super::{DirectedGraph, Node, NodeSet};

/// Kosaraju's two-pass algorithm with explicit stacks.
pub(super) fn components(g: &DirectedGraph) -> Vec<NodeSet> {
    let n = g.node_count();
    let mut visited = vec![false; n];
    let mut finish: Vec<Node> = Vec::with_capacity(n);

    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        // (node, next child position)
        let mut stack: Vec<(Node, usize)> = vec![(root, 0)];
        while let Some(&mut (v, ref mut pos)) = stack.last_mut() {
            let ch = g.children(v);
            if *pos < ch.len() {
                let w = ch[*pos];
                *pos += 1;
                if !visited[w] {
                    visited[w] = true;
                    stack.push((w, 0));
                }
            } else {
                finish.push(v);
                stack.pop();
            }
        }
    }

    let mut comp = vec![usize::MAX; n];
    let mut out: Vec<Vec<Node>> = Vec::new();
    for &root in finish.iter().rev() {
        if comp[root] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![root];
        comp[root] = id;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for &w in g.parents(v) {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        out.push(members);
    }

    let mut sets: Vec<NodeSet> = out.into_iter().map(NodeSet::from).collect();
    sets.sort_by_key(|s| s.as_slice()[0]);
    sets
}

/// Kahn's algorithm; `None` when the graph has a directed cycle.
pub(super) fn topological_order(g: &DirectedGraph) -> Option<Vec<Node>> {
    let n = g.node_count();
    let mut indeg: Vec<usize> = (0..n).map(|v| g.parents(v).len()).collect();
    let mut queue: VecDeque<Node> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in g.children(v) {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    (order.len() == n).then_some(order)
}
