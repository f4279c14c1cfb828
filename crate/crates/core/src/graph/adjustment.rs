use super::separation::{SeparationKind, Separator};
use super::{DirectedGraph, Node, NodeSet};
use crate::error::{Error, Result};

fn validate(g: &DirectedGraph, x: Node, y: Node, z: &NodeSet) -> Result<()> {
    g.check_node(x)?;
    g.check_node(y)?;
    for v in z {
        g.check_node(v)?;
    }
    if x == y || z.contains(x) || z.contains(y) {
        return Err(Error::InvalidQuery(
            "treatment, outcome and adjustment set must be pairwise disjoint".into(),
        ));
    }
    for v in z.iter().chain([x, y]) {
        if !g.is_observed(v) {
            return Err(Error::LatentNode(g.label(v).to_string()));
        }
    }
    Ok(())
}

/// `De(y) = ∅` and `Ch(x) ⊆ {y}`.
pub fn is_pre_treatment(g: &DirectedGraph, x: Node, y: Node) -> bool {
    g.children(y).is_empty() && g.children(x).iter().all(|&c| c == y)
}

/// Backdoor criterion under σ-separation: `z` holds no descendant of `x`
/// and σ-blocks every path from `x` to `y` that starts with an edge into `x`.
pub fn is_backdoor_adjustment_set(
    g: &DirectedGraph,
    x: Node,
    y: Node,
    z: &NodeSet,
) -> Result<bool> {
    validate(g, x, y, z)?;
    if !g.descendants(x)?.is_disjoint(z) {
        return Ok(false);
    }
    Separator::new(g, SeparationKind::SigmaSeparation)?.backdoor_blocked(x, y, z)
}

/// The same question answered on the graph augmented with a parentless
/// intervention node `I -> x`: `z ⊥σ I` and `y ⊥σ I | {x} ∪ z`.
pub fn intervention_node_check(
    g: &DirectedGraph,
    x: Node,
    y: Node,
    z: &NodeSet,
) -> Result<bool> {
    validate(g, x, y, z)?;
    let gi = g.with_intervention_node(x, &format!("I_{}", g.label(x)))?;
    let i = gi.node_count() - 1;
    let sep = Separator::new(&gi, SeparationKind::SigmaSeparation)?;
    for v in z {
        if !sep.separated(v, i, &NodeSet::new())? {
            return Ok(false);
        }
    }
    sep.separated(y, i, &z.with(x))
}

/// Every observed subset of `O \ {x, y}` with at most `max_size` members that
/// passes the backdoor criterion, ordered by size and then lexicographically.
pub fn enumerate_valid_adjustment_sets(
    g: &DirectedGraph,
    x: Node,
    y: Node,
    max_size: usize,
) -> Result<Vec<NodeSet>> {
    validate(g, x, y, &NodeSet::new())?;
    let candidates = g.observed().without(x).without(y);
    let de_x = g.descendants(x)?;
    let sep = Separator::new(g, SeparationKind::SigmaSeparation)?;
    let mut out = Vec::new();
    for z in candidates.subsets_up_to(max_size) {
        if z.is_disjoint(&de_x) && sep.backdoor_blocked(x, y, &z)? {
            out.push(z);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn confounded() -> DirectedGraph {
        DirectedGraph::from_labels(&["U", "X", "Y"], &[("U", "X"), ("U", "Y"), ("X", "Y")])
            .unwrap()
    }

    #[test]
    fn textbook_confounder() {
        let g = confounded();
        for check in [is_backdoor_adjustment_set, intervention_node_check] {
            assert!(check(&g, 1, 2, &NodeSet::from([0])).unwrap());
            assert!(!check(&g, 1, 2, &NodeSet::new()).unwrap());
        }
        let sets = enumerate_valid_adjustment_sets(&g, 1, 2, 5).unwrap();
        assert_eq!(sets, vec![NodeSet::from([0])]);
    }

    #[test]
    fn descendant_of_treatment_is_rejected() {
        let g = DirectedGraph::from_labels(
            &["U", "X", "M", "Y"],
            &[("U", "X"), ("U", "Y"), ("X", "M"), ("M", "Y")],
        )
        .unwrap();
        assert!(!is_backdoor_adjustment_set(&g, 1, 3, &NodeSet::from([0, 2])).unwrap());
        assert!(!intervention_node_check(&g, 1, 3, &NodeSet::from([0, 2])).unwrap());
        assert!(is_backdoor_adjustment_set(&g, 1, 3, &NodeSet::from([0])).unwrap());
    }

    #[test]
    fn unconfounded_and_collider() {
        let g = DirectedGraph::from_labels(
            &["X", "Y", "C", "A"],
            &[("X", "Y"), ("A", "C")],
        )
        .unwrap();
        assert!(intervention_node_check(&g, 0, 1, &NodeSet::new()).unwrap());
        assert!(is_backdoor_adjustment_set(&g, 0, 1, &NodeSet::new()).unwrap());
        // Every subset of {C, A} is valid: nothing reaches X from behind.
        assert_eq!(enumerate_valid_adjustment_sets(&g, 0, 1, 2).unwrap().len(), 4);

        // Conditioning on a collider between X's parent and Y's parent opens a
        // backdoor path.
        let g = DirectedGraph::from_labels(
            &["P", "X", "Q", "Y", "C"],
            &[("P", "X"), ("Q", "Y"), ("P", "C"), ("Q", "C"), ("X", "Y")],
        )
        .unwrap();
        let c = NodeSet::from([4]);
        assert!(!is_backdoor_adjustment_set(&g, 1, 3, &c).unwrap());
        assert!(!intervention_node_check(&g, 1, 3, &c).unwrap());
        assert!(is_backdoor_adjustment_set(&g, 1, 3, &NodeSet::new()).unwrap());
    }

    #[test]
    fn overlapping_sets_are_errors() {
        let g = confounded();
        assert!(is_backdoor_adjustment_set(&g, 1, 2, &NodeSet::from([1])).is_err());
        assert!(intervention_node_check(&g, 1, 1, &NodeSet::new()).is_err());
        let hidden = g.with_observed([1, 2]).unwrap();
        assert!(matches!(
            is_backdoor_adjustment_set(&hidden, 1, 2, &NodeSet::from([0])),
            Err(Error::LatentNode(_))
        ));
    }
}
