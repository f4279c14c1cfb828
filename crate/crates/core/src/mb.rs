//! Markov blanket discovery over a [`CiProvider`].
//!
//! All four algorithms only ever look at independence answers, so they work
//! unchanged when the data come from a cyclic model. Ties and oracle runs
//! (where association strength is undefined) fall back to ascending index.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ci::CiProvider;
use crate::error::{Error, Result};
use crate::graph::{Node, NodeSet};

/// Largest conditioning subset HITON-PC tries when pruning a candidate.
pub const HITON_MAX_SUBSET: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MbAlgorithm {
    Tc,
    FastIamb,
    Iamb,
    #[serde(rename = "hiton")]
    HitonMb,
}

impl MbAlgorithm {
    pub const ALL: [MbAlgorithm; 4] =
        [MbAlgorithm::Tc, MbAlgorithm::FastIamb, MbAlgorithm::Iamb, MbAlgorithm::HitonMb];

    pub fn name(self) -> &'static str {
        match self {
            MbAlgorithm::Tc => "tc",
            MbAlgorithm::FastIamb => "fast-iamb",
            MbAlgorithm::Iamb => "iamb",
            MbAlgorithm::HitonMb => "hiton",
        }
    }

    /// TC while total conditioning is affordable, Fast-IAMB beyond.
    pub fn default_for(node_count: usize) -> Self {
        if node_count <= 50 { MbAlgorithm::Tc } else { MbAlgorithm::FastIamb }
    }
}

impl fmt::Display for MbAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MbAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MbAlgorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown Markov blanket algorithm `{s}`")))
    }
}

/// Markov blanket of `target` among `vars`.
pub fn discover_mb(alg: MbAlgorithm, p: &CiProvider, target: Node, vars: &NodeSet) -> Result<NodeSet> {
    if !vars.contains(target) {
        return Err(Error::InvalidQuery(format!(
            "target {} is not among the variables",
            p.label(target)
        )));
    }
    let mb = match alg {
        MbAlgorithm::Tc => total_conditioning(p, target, vars)?,
        MbAlgorithm::FastIamb => fast_iamb(p, target, vars)?,
        MbAlgorithm::Iamb => iamb(p, target, vars, NodeSet::new())?,
        MbAlgorithm::HitonMb => hiton_mb(p, target, vars)?,
    };
    log::debug!(
        "{alg} blanket of {}: {} members, {} tests so far",
        p.label(target),
        mb.len(),
        p.tests_performed()
    );
    Ok(mb)
}

fn total_conditioning(p: &CiProvider, t: Node, vars: &NodeSet) -> Result<NodeSet> {
    let alpha = match p.sample_size().map(|n| n / 10) {
        Some(q) if q > 0 => p.alpha() / (10.0 * q as f64),
        _ => p.alpha(),
    };
    let rest = vars.without(t);
    let mut mb = NodeSet::new();
    for y in rest.iter() {
        if !p.independent_at(t, y, &rest.without(y), alpha)? {
            mb.insert(y);
        }
    }
    Ok(mb)
}

/// Candidates ordered by decreasing association given `cond`, then index.
fn by_association(p: &CiProvider, t: Node, cands: &NodeSet, cond: &NodeSet) -> Result<Vec<Node>> {
    let mut scored = Vec::with_capacity(cands.len());
    for c in cands.iter() {
        scored.push((c, p.association(t, c, cond)?.unwrap_or(0.0)));
    }
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
    Ok(scored.into_iter().map(|(c, _)| c).collect())
}

fn dependent_given(p: &CiProvider, t: Node, cands: &NodeSet, cond: &NodeSet) -> Result<NodeSet> {
    let mut out = NodeSet::new();
    for c in cands.iter() {
        if !p.independent(t, c, cond)? {
            out.insert(c);
        }
    }
    Ok(out)
}

fn shrink(p: &CiProvider, t: Node, mb: &mut NodeSet) -> Result<()> {
    for y in mb.clone().iter() {
        if p.independent(t, y, &mb.without(y))? {
            mb.remove(y);
        }
    }
    Ok(())
}

/// Grow phases admit every candidate that is still dependent given the
/// growing blanket, strongest first. Without association strength (oracle)
/// only one candidate is admitted per phase.
fn fast_iamb(p: &CiProvider, t: Node, vars: &NodeSet) -> Result<NodeSet> {
    let others = vars.without(t);
    let single = p.is_oracle();
    let mut mb = NodeSet::new();
    let mut candidates = dependent_given(p, t, &others, &mb)?;
    let mut seen: HashSet<NodeSet> = HashSet::new();
    while !candidates.is_empty() {
        let old = mb.clone();
        let snapshot = mb.clone();
        for y in by_association(p, t, &candidates, &snapshot)? {
            if mb.contains(y) {
                continue;
            }
            if !p.independent(t, y, &mb)? {
                mb.insert(y);
                if single {
                    break;
                }
            }
        }
        shrink(p, t, &mut mb)?;
        candidates = dependent_given(p, t, &others.difference(&mb), &mb)?;
        if mb == old || !seen.insert(mb.clone()) {
            break;
        }
    }
    Ok(mb)
}

/// Grow one strongest dependent candidate at a time until none is left,
/// then shrink.
fn iamb(p: &CiProvider, t: Node, vars: &NodeSet, start: NodeSet) -> Result<NodeSet> {
    let mut mb = start;
    loop {
        let cands = vars.without(t).difference(&mb);
        let mut added = false;
        for c in by_association(p, t, &cands, &mb)? {
            if !p.independent(t, c, &mb)? {
                mb.insert(c);
                added = true;
                break;
            }
            if !p.is_oracle() {
                // Sorted by strength: the first independent one ends the scan.
                break;
            }
        }
        if !added {
            break;
        }
    }
    shrink(p, t, &mut mb)?;
    Ok(mb)
}

/// Parents and children of `t` with the separating sets found for rejected
/// variables.
fn hiton_pc(p: &CiProvider, t: Node, vars: &NodeSet) -> Result<(NodeSet, HashMap<Node, NodeSet>)> {
    let others = vars.without(t);
    let mut sepsets = HashMap::new();
    let mut open = NodeSet::new();
    for c in others.iter() {
        if p.independent(t, c, &NodeSet::new())? {
            sepsets.insert(c, NodeSet::new());
        } else {
            open.insert(c);
        }
    }
    let mut cpc: Vec<Node> = Vec::new();
    for c in by_association(p, t, &open, &NodeSet::new())? {
        cpc.push(c);
        let mut i = 0;
        while i < cpc.len() {
            let x = cpc[i];
            let rest: NodeSet = cpc.iter().copied().filter(|&v| v != x).collect();
            let mut sep = None;
            for s in rest.subsets_up_to(HITON_MAX_SUBSET) {
                if p.independent(t, x, &s)? {
                    sep = Some(s);
                    break;
                }
            }
            match sep {
                Some(s) => {
                    sepsets.insert(x, s);
                    cpc.remove(i);
                }
                None => i += 1,
            }
        }
    }
    Ok((cpc.into_iter().collect(), sepsets))
}

/// HITON-PC plus the spouse search, followed by a grow-shrink completion
/// pass. The completion pass recovers blanket members that are reachable
/// only through latent-confounded collider chains, which neither
/// parent/child sets nor one-step spouse tests can see.
fn hiton_mb(p: &CiProvider, t: Node, vars: &NodeSet) -> Result<NodeSet> {
    let (pc, sepsets) = hiton_pc(p, t, vars)?;
    let mut mb = pc.clone();
    for y in pc.iter() {
        let (pc_y, _) = hiton_pc(p, y, vars)?;
        for z in pc_y.iter() {
            if z == t || mb.contains(z) {
                continue;
            }
            let base = sepsets.get(&z).cloned().unwrap_or_default();
            if !p.independent(t, z, &base.with(y))? {
                mb.insert(z);
            }
        }
    }
    iamb(p, t, vars, mb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{markov_blanket, DirectedGraph, SeparationKind};

    fn all_agree(g: &DirectedGraph) {
        let p = CiProvider::oracle(g.clone());
        let vars = g.observed();
        for t in vars.iter() {
            let truth = markov_blanket(g, t, SeparationKind::SigmaSeparation).unwrap();
            for alg in MbAlgorithm::ALL {
                let got = discover_mb(alg, &p, t, &vars).unwrap();
                assert_eq!(got, truth, "{alg} target {}", g.label(t));
            }
        }
    }

    #[test]
    fn chain_blanket() {
        let g = DirectedGraph::from_labels(&["A", "B", "C"], &[("A", "B"), ("B", "C")]).unwrap();
        let p = CiProvider::oracle(g.clone());
        for alg in MbAlgorithm::ALL {
            assert_eq!(discover_mb(alg, &p, 1, &g.observed()).unwrap(), NodeSet::from([0, 2]));
        }
        all_agree(&g);
    }

    #[test]
    fn spouses_cycles_and_latents() {
        let g = DirectedGraph::from_labels(
            &["A", "B", "C", "D", "E"],
            &[("A", "C"), ("B", "C"), ("C", "D"), ("D", "C"), ("E", "D")],
        )
        .unwrap();
        all_agree(&g);
        // A latent confounder chain extends the blanket through colliders.
        let g = DirectedGraph::new(
            (0..6).map(|i| format!("V{i}")).collect(),
            [(0, 1), (2, 1), (2, 3), (4, 3), (4, 5)],
            [0, 1, 3, 5],
        )
        .unwrap();
        all_agree(&g);
    }

    #[test]
    fn tc_issues_one_test_per_other_variable() {
        let g = DirectedGraph::from_labels(
            &["A", "B", "C", "D"],
            &[("A", "B"), ("B", "C"), ("C", "B"), ("D", "C")],
        )
        .unwrap();
        let p = CiProvider::oracle(g.clone());
        discover_mb(MbAlgorithm::Tc, &p, 0, &g.observed()).unwrap();
        assert_eq!(p.tests_performed(), 3);
    }

    #[test]
    fn names_round_trip() {
        for alg in MbAlgorithm::ALL {
            assert_eq!(alg.name().parse::<MbAlgorithm>().unwrap(), alg);
            assert_eq!(serde_json::to_string(&alg).unwrap(), format!("\"{}\"", alg.name()));
        }
        assert!("pc".parse::<MbAlgorithm>().is_err());
        assert_eq!(MbAlgorithm::default_for(50), MbAlgorithm::Tc);
        assert_eq!(MbAlgorithm::default_for(51), MbAlgorithm::FastIamb);
    }

    #[test]
    fn target_must_be_a_variable() {
        let g = DirectedGraph::from_labels(&["A", "B"], &[("A", "B")]).unwrap();
        let p = CiProvider::oracle(g);
        assert!(discover_mb(MbAlgorithm::Tc, &p, 1, &NodeSet::from([0])).is_err());
    }
}
