//! Shared generators and a brute-force separation oracle for integration
//! tests.
#![allow(dead_code)]

use cycadj::{DirectedGraph, Node, NodeSet};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random directed graph on `n` nodes. Each ordered pair gets an edge with
/// probability `p`; with `force_cycle` a directed ring over 2-4 random nodes
/// is added. `latents` random nodes are hidden.
pub fn random_graph(r: &mut ChaCha8Rng, n: usize, p: f64, force_cycle: bool, latents: usize) -> DirectedGraph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && r.random_bool(p) {
                edges.push((a, b));
            }
        }
    }
    if force_cycle && n >= 2 {
        let mut order: Vec<Node> = (0..n).collect();
        order.shuffle(r);
        let len = r.random_range(2..=n.min(4));
        for i in 0..len {
            let e = (order[i], order[(i + 1) % len]);
            if !edges.contains(&e) {
                edges.push(e);
            }
        }
    }
    let mut nodes: Vec<Node> = (0..n).collect();
    nodes.shuffle(r);
    let hidden: Vec<Node> = nodes[..latents.min(n)].to_vec();
    let observed: Vec<Node> = (0..n).filter(|v| !hidden.contains(v)).collect();
    DirectedGraph::with_default_labels(n, edges, observed).unwrap()
}

/// `count` graphs with 3..=`max_nodes` nodes, every other one forced cyclic,
/// every third one with up to two latents.
pub fn graph_corpus(seed: u64, count: usize, max_nodes: usize) -> Vec<DirectedGraph> {
    let mut r = rng(seed);
    (0..count)
        .map(|i| {
            let n = r.random_range(3..=max_nodes);
            let p = r.random_range(0.1..0.35);
            let latents = if i % 3 == 2 { r.random_range(1..=2).min(n - 2) } else { 0 };
            random_graph(&mut r, n, p, i % 2 == 0, latents)
        })
        .collect()
}

/// Random graph in pre-treatment shape: covariates `0..k` with arbitrary
/// (possibly cyclic) edges among them and into `x = k` and `y = k + 1`, and
/// `x -> y` with probability one half.
pub fn pre_treatment_graph(r: &mut ChaCha8Rng, k: usize, latents: usize) -> (DirectedGraph, Node, Node) {
    let (x, y) = (k, k + 1);
    let mut edges = Vec::new();
    for a in 0..k {
        for b in 0..k {
            if a != b && r.random_bool(0.25) {
                edges.push((a, b));
            }
        }
        if r.random_bool(0.4) {
            edges.push((a, x));
        }
        if r.random_bool(0.4) {
            edges.push((a, y));
        }
    }
    if k >= 2 && r.random_bool(0.5) {
        let a = r.random_range(0..k);
        let b = (a + r.random_range(1..k)) % k;
        for e in [(a, b), (b, a)] {
            if !edges.contains(&e) {
                edges.push(e);
            }
        }
    }
    if r.random_bool(0.5) {
        edges.push((x, y));
    }
    let mut covs: Vec<Node> = (0..k).collect();
    covs.shuffle(r);
    let hidden = &covs[..latents.min(k)];
    let observed: Vec<Node> = (0..k + 2).filter(|v| !hidden.contains(v)).collect();
    (DirectedGraph::with_default_labels(k + 2, edges, observed).unwrap(), x, y)
}

pub fn subsets(items: &[Node]) -> Vec<NodeSet> {
    (0u32..1 << items.len())
        .map(|m| items.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, &v)| v).collect())
        .collect()
}

fn reach(g: &DirectedGraph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut r = vec![vec![false; n]; n];
    for (v, row) in r.iter_mut().enumerate() {
        row[v] = true;
    }
    for (a, b) in g.edges() {
        r[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if r[i][k] && r[k][j] {
                    r[i][j] = true;
                }
            }
        }
    }
    r
}

/// Separation by enumerating every simple path, choosing each available
/// orientation of every step. Colliders open when they are ancestors of `s`;
/// a non-collider in `s` blocks under d-separation, and under σ-separation
/// only when one of its path edges leaves its strongly connected component.
pub fn naive_separated(g: &DirectedGraph, sigma: bool, a: Node, b: Node, s: &NodeSet) -> bool {
    naive_blocked(g, sigma, a, b, s, false)
}

/// Whether every simple path from `x` to `y` whose first edge points into `x`
/// is σ-blocked by `z`.
pub fn naive_backdoor_blocked(g: &DirectedGraph, x: Node, y: Node, z: &NodeSet) -> bool {
    naive_blocked(g, true, x, y, z, true)
}

fn naive_blocked(g: &DirectedGraph, sigma: bool, a: Node, b: Node, s: &NodeSet, into_a: bool) -> bool {
    let r = reach(g);
    let n = g.node_count();
    let anc: Vec<bool> = (0..n).map(|v| s.iter().any(|t| r[v][t])).collect();
    let same = |u: Node, v: Node| r[u][v] && r[v][u];
    // dirs[i] is true when step i follows path[i] -> path[i + 1].
    let mut path = vec![a];
    let mut dirs: Vec<bool> = Vec::new();
    let mut check = |path: &[Node], dirs: &[bool]| {
        !(into_a && dirs[0]) && path_open(sigma, s, &anc, &same, path, dirs)
    };
    !open_path(g, b, &mut check, &mut path, &mut dirs)
}

fn open_path(
    g: &DirectedGraph,
    target: Node,
    check: &mut dyn FnMut(&[Node], &[bool]) -> bool,
    path: &mut Vec<Node>,
    dirs: &mut Vec<bool>,
) -> bool {
    let cur = *path.last().unwrap();
    if cur == target {
        return check(path, dirs);
    }
    for next in 0..g.node_count() {
        if path.contains(&next) {
            continue;
        }
        for forward in [true, false] {
            let exists = if forward { g.has_edge(cur, next) } else { g.has_edge(next, cur) };
            if !exists {
                continue;
            }
            path.push(next);
            dirs.push(forward);
            let open = open_path(g, target, check, path, dirs);
            path.pop();
            dirs.pop();
            if open {
                return true;
            }
        }
    }
    false
}

fn path_open(
    sigma: bool,
    s: &NodeSet,
    anc: &[bool],
    same: &dyn Fn(Node, Node) -> bool,
    path: &[Node],
    dirs: &[bool],
) -> bool {
    for i in 1..path.len() - 1 {
        let v = path[i];
        // Edge i-1 joins path[i-1], v; edge i joins v, path[i+1].
        let into_from_left = dirs[i - 1];
        let into_from_right = !dirs[i];
        if into_from_left && into_from_right {
            if !anc[v] {
                return false;
            }
        } else if s.contains(v) {
            if !sigma {
                return false;
            }
            let leaves_left = !into_from_left && !same(v, path[i - 1]);
            let leaves_right = !into_from_right && !same(v, path[i + 1]);
            if leaves_left || leaves_right {
                return false;
            }
        }
    }
    true
}
